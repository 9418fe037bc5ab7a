"""
Escenas 2D de P: contorno del politopo, generadores con su etiqueta K,
segmentos de árboles gradiente y gráficas de levantamientos de secciones.
Se emiten como SVG 1.1, CSV o PNG (Pillow).
"""
import csv
import io
import logging
import math
from fractions import Fraction
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from PIL import Image, ImageDraw
from pydantic import BaseModel, Field

from src.schemas.weights import Weights
from src.utils.errors import PlotError
from src.utils.homs import hom_basis, intersection_point, lattice_k, weighted_compositions
from src.utils.lattice import chart_polytope, fiber_period

logger = logging.getLogger(__name__)

WIDTH = 640
HEIGHT = 480
MARGIN = 48


class Segment(BaseModel):
    start: tuple[float, float]
    end: tuple[float, float]
    kind: str = Field(default="edge", description="edge | tree | section")
    label: str = ""


class Dot(BaseModel):
    at: tuple[float, float]
    label: str


class Scene(BaseModel):
    """Primitivas en coordenadas de la carta; y = 0 para n = 1."""

    title: str
    segments: list[Segment] = Field(default_factory=list)
    dots: list[Dot] = Field(default_factory=list)
    bounds: tuple[float, float, float, float] = Field(default=..., description="xmin, xmax, ymin, ymax")


def _as_plane(point: Sequence[Fraction]) -> tuple[float, float]:
    if len(point) == 1:
        return float(point[0]), 0.0
    return float(point[0]), float(point[1])


def _k_label(k: Sequence[int]) -> str:
    return "(" + ",".join(str(kj) for kj in k) + ")"


def polytope_scene(W: Weights, i: int = 0, dist: Optional[int] = None,
                   trees: Sequence[tuple[int, int, int, tuple[int, ...], tuple[int, ...]]] = ()) -> Scene:
    """
    Contorno de P_{sigma_i}, puntos v_{0d;K} de Hom(L_0, L_d) y segmentos
    v_ab -> v_ac, v_bc -> v_ac de los árboles indicados.

    Raises:
        PlotError: si n > 2
    """
    if W.n > 2:
        raise PlotError(f"plots require n ≤ 2 (weights {W.q} give n = {W.n})")
    chart = chart_polytope(W, i)
    corners = [_as_plane(v) for v in chart.vertices]
    scene = Scene(title=f"P(q={W.q}) chart {i}", bounds=_bounds(corners))
    outline = list(zip(corners, corners[1:] + corners[:1])) if W.n == 2 else [tuple(corners)]
    for s, e in outline:
        scene.segments.append(Segment(start=s, end=e))

    if dist is not None:
        if dist == 0:
            scene.dots.append(Dot(at=corners[0], label="P"))
        for g in hom_basis(W, 0, dist, i).gens:
            if g.v is not None:
                scene.dots.append(Dot(at=_as_plane(g.v), label=_k_label(g.K.k)))

    for a, b, c, k_ab, k_bc in trees:
        K_ab, K_bc = lattice_k(W, k_ab), lattice_k(W, k_bc)
        K_ac = lattice_k(W, [x + y for x, y in zip(k_ab, k_bc)])
        v_ac = _as_plane(intersection_point(W, a, c, K_ac, i))
        label = f"{a}<{b}<{c}"
        scene.segments.append(Segment(start=_as_plane(intersection_point(W, a, b, K_ab, i)),
                                      end=v_ac, kind="tree", label=label))
        scene.segments.append(Segment(start=_as_plane(intersection_point(W, b, c, K_bc, i)),
                                      end=v_ac, kind="tree", label=label))
        scene.dots.append(Dot(at=v_ac, label=_k_label(K_ac.k)))
    logger.debug("Polytope scene: %d segments, %d dots", len(scene.segments), len(scene.dots))
    return scene


def composable_trees(W: Weights, base: int = 0) -> list[tuple[int, int, int, tuple[int, ...], tuple[int, ...]]]:
    """Todas las ternas a < b < c de E con sus pares de K."""
    labels = range(base, base + W.total)
    found = []
    for a in labels:
        for b in labels:
            for c in labels:
                if a < b < c:
                    for K_ab in weighted_compositions(W, b - a):
                        for K_bc in weighted_compositions(W, c - b):
                            found.append((a, b, c, K_ab.k, K_bc.k))
    return found


def _clip_line(slope: float, intercept: float, x_max: float, period: float):
    """Trozo de y = slope x + intercept con 0 <= x <= x_max y 0 <= y <= period."""
    lo, hi = 0.0, x_max
    if slope != 0:
        t0, t1 = sorted(((0 - intercept) / slope, (period - intercept) / slope))
        lo, hi = max(lo, t0), min(hi, t1)
    elif not 0 <= intercept <= period:
        return None
    if hi <= lo:
        return None
    return (lo, slope * lo + intercept), (hi, slope * hi + intercept)


def section_scene(W: Weights, first: int, last: int, i: int = 0) -> Scene:
    """
    Gráficas de los levantamientos y/2pi = (a / 2q0q1) x - K sobre P y la
    fibra [0, q_i] (periodo 2pi q_i), para a = first..last.

    Raises:
        PlotError: si n != 1
    """
    if W.n != 1:
        raise PlotError(f"section plots require n = 1 (weights {W.q} give n = {W.n})")
    x_max = float(chart_polytope(W, i).vertices[1][0])
    period = float(fiber_period(W, i))
    scene = Scene(title=f"Sections of P(q={W.q}), fiber period 2pi*{fiber_period(W, i)}",
                  bounds=(0.0, x_max, 0.0, period))
    scene.segments.append(Segment(start=(0.0, 0.0), end=(x_max, 0.0)))
    scene.segments.append(Segment(start=(0.0, period), end=(x_max, period)))
    for a in range(first, last + 1):
        slope = a / W.scale
        top = slope * x_max
        for shift in range(math.floor(-max(top, 0.0)) - 1, math.ceil(period - min(top, 0.0)) + 1):
            piece = _clip_line(slope, float(shift), x_max, period)
            if piece is not None:
                scene.segments.append(Segment(start=piece[0], end=piece[1], kind="section", label=f"a={a}"))
    return scene


def _bounds(points: Sequence[tuple[float, float]]) -> tuple[float, float, float, float]:
    xs, ys = [p[0] for p in points], [p[1] for p in points]
    return min(xs), max(xs), min(ys), max(ys)


def _projector(scene: Scene, width: int, height: int):
    xmin, xmax, ymin, ymax = scene.bounds
    span_x = (xmax - xmin) or 1.0
    span_y = (ymax - ymin) or 1.0
    factor = min((width - 2 * MARGIN) / span_x, (height - 2 * MARGIN) / span_y)

    def project(p: tuple[float, float]) -> tuple[float, float]:
        # El eje y del dibujo crece hacia abajo
        return MARGIN + (p[0] - xmin) * factor, height - MARGIN - (p[1] - ymin) * factor

    return project


COLORS = {"edge": "black", "tree": "#c0392b", "section": "#2c5aa0"}


def scene_to_svg(scene: Scene, width: int = WIDTH, height: int = HEIGHT) -> str:
    project = _projector(scene, width, height)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">',
        f"<title>{escape(scene.title)}</title>",
    ]
    for s in scene.segments:
        (x1, y1), (x2, y2) = project(s.start), project(s.end)
        lines.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                     f'stroke="{COLORS[s.kind]}" stroke-width="1.5"/>')
    for d in scene.dots:
        x, y = project(d.at)
        lines.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="4" fill="black"/>')
        lines.append(f'<text x="{x + 6:.3f}" y="{y - 6:.3f}" font-size="12">{escape(d.label)}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def scene_to_csv(scene: Scene) -> str:
    """Filas kind,label,x1,y1,x2,y2; los puntos repiten el extremo."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["kind", "label", "x1", "y1", "x2", "y2"])
    for s in scene.segments:
        writer.writerow([s.kind, s.label, *map(repr, s.start), *map(repr, s.end)])
    for d in scene.dots:
        writer.writerow(["dot", d.label, *map(repr, d.at), *map(repr, d.at)])
    return buffer.getvalue()


def scene_to_png(scene: Scene, path: str, width: int = WIDTH, height: int = HEIGHT) -> None:
    project = _projector(scene, width, height)
    image = Image.new("RGB", (width, height), "white")
    draw = ImageDraw.Draw(image)
    for s in scene.segments:
        draw.line([project(s.start), project(s.end)], fill=COLORS[s.kind], width=2)
    for d in scene.dots:
        x, y = project(d.at)
        draw.ellipse([x - 4, y - 4, x + 4, y + 4], fill="black")
        draw.text((x + 6, y - 16), d.label, fill="black")
    image.save(path, format="PNG")
