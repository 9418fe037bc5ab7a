"""
Pesos, vectores stacky, cartas, politopos de momento y cambios de carta
para P(q0,...,qn).

La red N se representa por la matriz racional de columnas
b_0 = -(l/q0) sum(e_i), b_i = (l/q_i) e_i; los índices se calculan con
cocientes de determinantes.
"""
import logging
import math
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Sequence

import numpy as np
from sympy import Matrix

from src.schemas.base import RationalPoint
from src.schemas.weights import Chart, ChartTransform, Weights
from src.utils.errors import ChartError, WeightsError

logger = logging.getLogger(__name__)


def build_weights(q: Sequence[int]) -> Weights:
    """
    Valida los pesos y construye Weights.

    Args:
        q: Lista de enteros (q0,...,qn)

    Returns:
        Weights con n, l, prodq y scale
    """
    q = tuple(int(qi) for qi in q)
    if len(q) < 2:
        raise WeightsError("At least two weights are required (n >= 1)")
    if any(qi < 1 for qi in q):
        raise WeightsError(f"Weights must be positive integers: {q}")
    g = reduce(math.gcd, q)
    if g != 1:
        raise WeightsError(f"gcd must be 1 (gcd of {q} is {g})")
    return Weights(q=q)


def _check_chart(W: Weights, i: int) -> None:
    if not 0 <= i <= W.n:
        raise ChartError(f"Chart index {i} out of range 0..{W.n}")


def stacky_vectors(W: Weights) -> list[RationalPoint]:
    """
    Vectores stacky b_0,...,b_n en la base e_1..e_n.

    Se verifica la relación sum(q_i b_i) = 0.
    """
    n, l = W.n, W.l
    vectors = [tuple(Fraction(-l, W.q[0]) for _ in range(n))]
    for i in range(1, n + 1):
        vectors.append(tuple(Fraction(l, W.q[i]) if k == i - 1 else Fraction(0) for k in range(n)))

    relation = [sum(W.q[j] * vectors[j][k] for j in range(n + 1)) for k in range(n)]
    assert all(c == 0 for c in relation), f"sum q_i b_i = {relation}"
    return vectors


def chart_polytope(W: Weights, i: int) -> Chart:
    """
    Politopo P_{sigma_i}: envolvente convexa de {0, v^{ik} : k != i},
    con x^{il}(v^{ik}) = delta_kl * 2q0...qn / q_k.
    """
    _check_chart(W, i)
    others = W.others(i)
    origin = tuple(Fraction(0) for _ in others)
    vertices = [origin]
    for k in others:
        vertices.append(tuple(
            Fraction(W.scale, W.q[k]) if l == k else Fraction(0) for l in others))

    b = stacky_vectors(W)
    return Chart(
        index=i,
        vertices=tuple(vertices),
        vertex_labels=(i, *others),
        stacky_basis=tuple(b[k] for k in others),
    )


def _abs_det(columns: Sequence[RationalPoint]) -> Fraction:
    det = Matrix([[c[r] for c in columns] for r in range(len(columns))]).det()
    return abs(Fraction(int(det.p), int(det.q)))


def covolume(W: Weights) -> Fraction:
    """Covolumen de N = <b_0..b_n>: mcd de los menores maximales."""
    b = stacky_vectors(W)
    minors = [_abs_det(cols) for cols in combinations(b, W.n)]
    # Todas las b_i son enteras (l/q_i es entero)
    return Fraction(reduce(math.gcd, (int(m) for m in minors)))


def local_group_order(W: Weights, i: int) -> int:
    """
    Orden del grupo local N/N_{sigma_i}: |det(b_k, k != i)| / covol(N).

    Returns:
        El índice [N : N_{sigma_i}], que coincide con q_i
    """
    chart = chart_polytope(W, i)
    order = _abs_det(chart.stacky_basis) / covolume(W)
    assert order.denominator == 1 and order == W.q[i], f"[N:N_sigma_{i}] = {order}"
    return int(order)


def cone_is_smooth(W: Weights, i: int) -> bool:
    return local_group_order(W, i) == 1


def fiber_period(W: Weights, i: int) -> int:
    """Periodo de la fibra sobre B_{sigma_i}, en unidades de 2*pi (es q_i)."""
    _check_chart(W, i)
    return W.q[i]


def barycentric(W: Weights, i: int, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """
    Coordenadas baricéntricas (t_0..t_n) de x respecto a los vértices
    etiquetados; t_i es el término de frontera.
    """
    _check_chart(W, i)
    others = W.others(i)
    if len(x) != len(others):
        raise ChartError(f"Point {tuple(x)} has wrong dimension for chart {i}")
    t = [Fraction(0)] * (W.n + 1)
    for coord, l in zip(x, others):
        t[l] = Fraction(W.q[l]) * coord / W.scale
    t[i] = 1 - sum(t[l] for l in others)
    return tuple(t)


def point_from_barycentric(W: Weights, j: int, t: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Inversa de barycentric en la carta j."""
    _check_chart(W, j)
    return tuple(Fraction(W.scale) * t[l] / W.q[l] for l in W.others(j))


def in_polytope(W: Weights, i: int, x: Sequence[Fraction], closed: bool = True) -> bool:
    t = barycentric(W, i, x)
    if closed:
        return all(tj >= 0 for tj in t)
    return all(tj > 0 for tj in t)


def is_interior(W: Weights, i: int, x: Sequence[Fraction]) -> bool:
    return in_polytope(W, i, x, closed=False)


def random_interior_points(W: Weights, i: int, count: int, rng: np.random.Generator,
                           spread: int = 60) -> list[tuple[Fraction, ...]]:
    """Puntos racionales interiores: baricéntricas r_j / sum(r) con r_j >= 1."""
    points = []
    for _ in range(count):
        r = [int(x) for x in rng.integers(1, spread, size=W.n + 1)]
        total = sum(r)
        points.append(point_from_barycentric(W, i, [Fraction(rj, total) for rj in r]))
    return points


def chart_transform(W: Weights, i: int, j: int) -> ChartTransform:
    """
    Mapa afín de P_{sigma_i} a P_{sigma_j} fijado por la correspondencia de
    vértices (la etiqueta k va a la etiqueta k): v^{ij} -> 0, 0 -> v^{ji},
    v^{ik} -> v^{jk}.  Para i = j devuelve la identidad.
    """
    _check_chart(W, i)
    _check_chart(W, j)
    n = W.n
    zero = tuple(Fraction(0) for _ in range(n))

    def image(x):
        return point_from_barycentric(W, j, barycentric(W, i, x))

    offset = image(zero)
    columns = []
    for m in range(n):
        unit = tuple(Fraction(1) if k == m else Fraction(0) for k in range(n))
        columns.append(tuple(a - b for a, b in zip(image(unit), offset)))
    linear = tuple(tuple(columns[c][r] for c in range(n)) for r in range(n))
    return ChartTransform(source=i, target=j, linear=linear, offset=offset)


def apply_transform(T: ChartTransform, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(
        sum((a * xi for a, xi in zip(row, x)), Fraction(0)) + o
        for row, o in zip(T.linear, T.offset)
    )


def compose_transforms(second: ChartTransform, first: ChartTransform) -> ChartTransform:
    """second o first."""
    if first.target != second.source:
        raise ChartError(f"Cannot compose {first.source}->{first.target} with {second.source}->{second.target}")
    n = len(first.offset)
    linear = tuple(
        tuple(sum((second.linear[r][k] * first.linear[k][c] for k in range(n)), Fraction(0)) for c in range(n))
        for r in range(n)
    )
    offset = apply_transform(second, first.offset)
    return ChartTransform(source=first.source, target=second.target, linear=linear, offset=offset)


def transform_equal(a: ChartTransform, b: ChartTransform) -> bool:
    return (a.source, a.target, a.linear, a.offset) == (b.source, b.target, b.linear, b.offset)
