"""
Clase propia para explorar la categoría de Morse Mo_E(P) de un espacio
proyectivo con pesos y verificar su funtor espejo.
"""
import logging
from typing import Any, Optional, Sequence

import numpy as np

from src.models.flow import (
    build_gradient_tree,
    integrate_trajectory,
    tree_summary_json,
    write_trajectory_csv,
)
from src.models.morse import build_category, category_to_json, unit_vector
from src.models.suites import SuiteContext, run_suites
from src.schemas.category import CategoryData
from src.schemas.config import OutputFormat, default_threads
from src.schemas.reports import GradientTree, SuiteReport, Trajectory
from src.utils.errors import PlotError
from src.utils.homs import exceptional_max_R, hom_dimension_table, lattice_k
from src.utils.lattice import (
    build_weights,
    chart_polytope,
    cone_is_smooth,
    fiber_period,
    local_group_order,
    random_interior_points,
)
from src.utils.plot import (
    Scene,
    composable_trees,
    polytope_scene,
    scene_to_csv,
    scene_to_png,
    scene_to_svg,
    section_scene,
)

logger = logging.getLogger(__name__)


class CategoryExplorer:
    """
    Clase para simplificar el cálculo y la verificación de Mo_E(P(q)).
    """

    def __init__(self, weights: Sequence[int], base: int = 0, chart: int = 0,
                 threads: Optional[int] = None):
        """
        Inicializa el explorador.

        Args:
            weights: Pesos (q0,...,qn) con mcd 1
            base: Primer objeto q de la colección
            chart: Carta en la que se expresan los puntos
            threads: Hilos. Si no se proporciona, se carga WPSHMS_THREADS desde .env
        """
        self.W = build_weights(weights)
        self.base = base
        self.chart = chart
        chart_polytope(self.W, chart)
        self.threads = threads if threads is not None else default_threads()
        self._category: Optional[CategoryData] = None

    def category(self) -> CategoryData:
        """
        Construye (una sola vez) la categoría.

        Returns:
            CategoryData de E = (L_q, ..., L_{q+R})
        """
        if self._category is None:
            self._category = build_category(self.W, self.base, self.chart, threads=self.threads)
        return self._category

    def category_json(self) -> str:
        return category_to_json(self.category())

    def info(self) -> dict[str, Any]:
        """
        Resumen de los datos de P(q): escalas, cartas y dimensiones de los hom.

        Returns:
            Diccionario serializable a JSON
        """
        W = self.W
        R = exceptional_max_R(W)
        charts = []
        for i in range(W.n + 1):
            chart = chart_polytope(W, i)
            charts.append({
                "index": i,
                "vertices": [[str(x) for x in v] for v in chart.vertices],
                "vertex_labels": list(chart.vertex_labels),
                "local_group_order": local_group_order(W, i),
                "smooth": cone_is_smooth(W, i),
                "fiber_period_2pi": fiber_period(W, i),
            })
        return {
            "weights": list(W.q),
            "n": W.n,
            "lcm": W.l,
            "prodq": W.prodq,
            "scale": W.scale,
            "R": R,
            "objects": list(range(self.base, self.base + R + 1)),
            "unit_vector": list(unit_vector(W)),
            "hom_dims": hom_dimension_table(W, R),
            "charts": charts,
        }

    def info_text(self) -> str:
        data = self.info()
        lines = [
            f"P{tuple(data['weights'])}: n={data['n']} lcm={data['lcm']} "
            f"2q0...qn={data['scale']} R={data['R']}",
            f"objects: L_{data['objects'][0]} .. L_{data['objects'][-1]}",
            f"unit vector u: {tuple(data['unit_vector'])}",
            "hom dims: " + ", ".join(f"d={d}: {dim}" for d, dim in data["hom_dims"].items()),
        ]
        for chart in data["charts"]:
            vertices = ", ".join("(" + ", ".join(v) + ")" for v in chart["vertices"])
            lines.append(f"chart {chart['index']}: vertices {vertices}; "
                         f"|N/N_sigma| = {chart['local_group_order']}; "
                         f"fiber period 2pi*{chart['fiber_period_2pi']}")
        return "\n".join(lines) + "\n"

    def verify(self, suite: str = "all", grid: Optional[int] = None, seed: int = 0) -> list[SuiteReport]:
        """
        Ejecuta las suites de verificación.

        Args:
            suite: Nombre de la suite o "all"
            grid: Resolución del barrido de módulo máximo
            seed: Semilla del muestreo de puntos racionales

        Returns:
            Un SuiteReport por suite
        """
        ctx = SuiteContext(self.W, self.base, self.chart, grid=grid, seed=seed,
                           threads=self.threads, category=self.category())
        return run_suites(ctx, suite)

    def trajectory(self, a: int, b: int, k: Sequence[int], x0: Optional[Sequence[float]] = None,
                   dt: float = 1e-3, steps: int = 1000, backward: bool = False, seed: int = 0) -> Trajectory:
        """
        Trayectoria del gradiente de f_{ab;K}. Sin x0 se sortea un punto
        racional interior con la semilla dada.
        """
        K = lattice_k(self.W, k)
        if x0 is None:
            point = random_interior_points(self.W, self.chart, 1, np.random.default_rng(seed))[0]
            x0 = [float(x) for x in point]
        return integrate_trajectory(self.W, a, b, K, x0, dt=dt, steps=steps, backward=backward, i=self.chart)

    def trajectory_csv(self, traj: Trajectory) -> str:
        return write_trajectory_csv(traj)

    def gradient_tree(self, a: int, b: int, c: int, k_ab: Sequence[int], k_bc: Sequence[int]) -> GradientTree:
        return build_gradient_tree(self.W, a, b, c, lattice_k(self.W, k_ab), lattice_k(self.W, k_bc), self.chart)

    def tree_json(self, tree: GradientTree) -> str:
        return tree_summary_json(tree)

    def scene(self, dist: Optional[int] = None, sections: Optional[tuple[int, int]] = None,
              trees: bool = False) -> Scene:
        """
        Escena de dibujo: gráficas de secciones si se pide un rango, si no
        el politopo con generadores y árboles.
        """
        if sections is not None:
            return section_scene(self.W, sections[0], sections[1], self.chart)
        tree_list = composable_trees(self.W, self.base) if trees else ()
        return polytope_scene(self.W, self.chart, dist=dist, trees=tree_list)

    def render(self, scene: Scene, fmt: OutputFormat, out: Optional[str] = None) -> Optional[str]:
        """
        Serializa la escena. PNG necesita ruta de salida; SVG y CSV
        devuelven el texto.
        """
        if fmt == OutputFormat.SVG:
            return scene_to_svg(scene)
        if fmt == OutputFormat.CSV:
            return scene_to_csv(scene)
        if fmt == OutputFormat.PNG:
            if out is None:
                raise PlotError("PNG output requires --out")
            scene_to_png(scene, out)
            return None
        raise PlotError(f"Unsupported plot format {fmt.value}; use svg, csv or png")
