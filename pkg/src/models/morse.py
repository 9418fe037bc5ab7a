"""
Categoría de homotopía de Morse con pesos Mo_E(P) para P(q0,...,qn).

Levantamientos lagrangianos, potenciales exactos, puntos de intersección y
el producto m2 con pesos exactos.  Todos los potenciales se guardan en
unidades de f/2pi y el peso de m2 es exp(-(f_ab + f_bc)(v_ac)/2pi).
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional, Sequence

from sympy.core.intfunc import igcdex

from src.schemas.base import LogValue, PosExact
from src.schemas.category import CategoryData, ProductEntry
from src.schemas.morphism import GenKey, LagrangianLift, LatticeK, MorphismGen, Potential
from src.schemas.weights import Weights
from src.utils.errors import ChartError, CompositionError, ExactDomainError
from src.utils.exact import (
    exp_of,
    lv_add,
    lv_log_of_rational,
    lv_neg,
    pe_eq,
    pe_mul_pow,
    pos_exact,
    to_float,
)
from src.utils.homs import (
    check_degree,
    exceptional_max_R,
    generator_degree,
    hom_basis,
    intersection_point,
    lattice_k,
)
from src.utils.lattice import barycentric, in_polytope

logger = logging.getLogger(__name__)

__all__ = [
    "unit_vector",
    "canonical_lift",
    "shifted_lift",
    "section_value",
    "intersection_point",
    "relative_potential",
    "lift_potential",
    "eval_potential",
    "potential_gradient",
    "compose",
    "disk_area",
    "ratio_check",
    "image_on_boundary",
    "build_category",
    "associativity_failures",
    "check_associativity",
    "category_to_json",
]


def unit_vector(W: Weights) -> tuple[int, ...]:
    """
    Vector entero u con sum(q_j u_j) = 1, por mcd extendido encadenado.
    Determinista: para (3, 2) da (1, -1).
    """
    u = [1]
    g = W.q[0]
    for qj in W.q[1:]:
        s, t, g = igcdex(g, qj)
        u = [int(s) * x for x in u] + [int(t)]
    assert g == 1 and sum(qj * uj for qj, uj in zip(W.q, u)) == 1, f"bad unit vector {u}"
    return tuple(u)


def canonical_lift(W: Weights, a: int, unit: Optional[Sequence[int]] = None) -> LagrangianLift:
    """
    Levantamiento K_a = a * u.

    Args:
        W: Pesos
        a: Grado del fibrado O(a)
        unit: Representante alternativo de u (opcional), debe cumplir sum(q u) = 1

    Returns:
        LagrangianLift de L_a
    """
    u = tuple(unit) if unit is not None else unit_vector(W)
    if len(u) != W.n + 1 or sum(qj * uj for qj, uj in zip(W.q, u)) != 1:
        raise CompositionError(f"Unit vector {u} does not satisfy sum(q_j u_j) = 1")
    return LagrangianLift(a=a, Ka=tuple(a * uj for uj in u))


def shifted_lift(lift: LagrangianLift, K: LatticeK) -> LagrangianLift:
    """Levantamiento de L_{a+d} con K_b = K_a + K."""
    return LagrangianLift(a=lift.a + K.d, Ka=tuple(x + k for x, k in zip(lift.Ka, K.k)))


def section_value(W: Weights, lift: LagrangianLift, i: int, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """
    y/2pi = (a / 2q0...qn) x^{(i)} - K^{(i)} sobre el politopo cerrado.
    """
    if not in_polytope(W, i, x):
        raise ChartError(f"Point {tuple(x)} lies outside the closed polytope of chart {i}")
    slope = Fraction(lift.a, W.scale)
    return tuple(slope * xl - lift.Ka[l] for xl, l in zip(x, W.others(i)))


def _log_arguments(W: Weights, i: int, x: Sequence[Fraction]) -> list[Fraction]:
    """Argumentos de los logaritmos indexados por j: frontera en j = i, q_l x_l en l != i."""
    args = [Fraction(0)] * (W.n + 1)
    total = Fraction(0)
    for xl, l in zip(x, W.others(i)):
        args[l] = W.q[l] * Fraction(xl)
        total += args[l]
    args[i] = W.scale - total
    return args


def relative_potential(W: Weights, a: int, b: int, K: LatticeK, i: int = 0) -> Potential:
    """
    Potencial f_{ab;K}/2pi con df_ab = d(f_b - f_a) y f_ab(v_{ab;K}) = 0.

    f/2pi = -sum_j (q_j k_j / 2Pq) log(arg_j) + ((b-a)/2Pq) log(2Pq) + C
    """
    if a >= b:
        raise CompositionError(f"Relative potential needs a < b, got a={a}, b={b}")
    check_degree(W, a, b, K)
    d = b - a
    coeffs = [Fraction(-qj * kj, W.scale) for qj, kj in zip(W.q, K.k)]

    const = lv_log_of_rational(W.scale, Fraction(d, W.scale))
    # C fija el cero en v: sum_j (q_j k_j / 2Pq) log(q_j k_j / d)
    for qj, kj in zip(W.q, K.k):
        if kj:
            const = lv_add(const, lv_log_of_rational(Fraction(qj * kj, d), Fraction(qj * kj, W.scale)))

    potential = Potential(
        weights=W,
        chart=i,
        coeff_boundary=coeffs[i],
        coeff=tuple(coeffs[l] for l in W.others(i)),
        const=const,
    )
    assert eval_potential(potential, intersection_point(W, a, b, K, i)).is_empty()
    return potential


def lift_potential(W: Weights, lift: LagrangianLift, i: int = 0) -> Potential:
    """f_{a;K_a}/2pi en coordenadas de momento (constante aditiva nula)."""
    coeffs = [Fraction(-qj * aj, W.scale) for qj, aj in zip(W.q, lift.Ka)]
    return Potential(
        weights=W,
        chart=i,
        coeff_boundary=coeffs[i],
        coeff=tuple(coeffs[l] for l in W.others(i)),
        const=lv_log_of_rational(W.scale, Fraction(lift.a, W.scale)),
    )


def _coefficients(p: Potential) -> list[Fraction]:
    W = p.weights
    coeffs = [Fraction(0)] * (W.n + 1)
    coeffs[p.chart] = p.coeff_boundary
    for c, l in zip(p.coeff, W.others(p.chart)):
        coeffs[l] = c
    return coeffs


def eval_potential(p: Potential, x: Sequence[Fraction]) -> LogValue:
    """
    Evalúa el potencial en un punto racional, con el convenio 0*log(0) = 0.

    Returns:
        LogValue exacto
    """
    W = p.weights
    args = _log_arguments(W, p.chart, x)
    value = p.const
    for coeff, arg in zip(_coefficients(p), args):
        if coeff == 0:
            continue
        if arg <= 0:
            raise ExactDomainError(f"log argument {arg} is not positive at {tuple(x)}")
        value = lv_add(value, lv_log_of_rational(arg, coeff))
    return value


def potential_gradient(p: Potential, x: Sequence[float]) -> list[float]:
    """Gradiente df/dx (unidades de 2pi) en un punto en coma flotante."""
    W = p.weights
    others = W.others(p.chart)
    boundary = W.scale - sum(W.q[l] * xl for xl, l in zip(x, others))
    grad = []
    for xl, l, c in zip(x, others, p.coeff):
        g = -float(p.coeff_boundary) * W.q[l] / boundary if p.coeff_boundary else 0.0
        if c:
            g += float(c) / xl
        grad.append(g)
    return grad


def compose(W: Weights, g_ab: MorphismGen, g_bc: MorphismGen) -> tuple[MorphismGen, PosExact]:
    """
    m2(V_ab, V_bc) = exp(-(f_ab + f_bc)(v_ac)) V_{ac;K_ab+K_bc}.

    Returns:
        (generador destino, peso exacto)
    """
    if g_ab.b != g_bc.a or not (g_ab.a <= g_ab.b <= g_bc.b) or g_ab.chart != g_bc.chart:
        raise CompositionError(
            f"Cannot compose ({g_ab.a}->{g_ab.b}) with ({g_bc.a}->{g_bc.b})")
    # La identidad P es unidad
    if g_ab.is_identity:
        return g_bc, pos_exact()
    if g_bc.is_identity:
        return g_ab, pos_exact()

    a, b, c, i = g_ab.a, g_ab.b, g_bc.b, g_ab.chart
    K_ac = lattice_k(W, [x + y for x, y in zip(g_ab.K.k, g_bc.K.k)])
    target = MorphismGen(
        a=a, b=c, K=K_ac, v=intersection_point(W, a, c, K_ac, i),
        degree=generator_degree(W, a, c, K_ac), chart=i)
    area = disk_area(W, g_ab, g_bc, target.v)
    return target, exp_of(lv_neg(area))


def disk_area(W: Weights, g_ab: MorphismGen, g_bc: MorphismGen,
              v_ac: Optional[Sequence[Fraction]] = None) -> LogValue:
    """A(gamma)/2pi = f_ab(v_ac) + f_bc(v_ac)."""
    i = g_ab.chart
    if v_ac is None:
        K_ac = lattice_k(W, [x + y for x, y in zip(g_ab.K.k, g_bc.K.k)])
        v_ac = intersection_point(W, g_ab.a, g_bc.b, K_ac, i)
    f_ab = relative_potential(W, g_ab.a, g_ab.b, g_ab.K, i)
    f_bc = relative_potential(W, g_bc.a, g_bc.b, g_bc.K, i)
    return lv_add(eval_potential(f_ab, v_ac), eval_potential(f_bc, v_ac))


def ratio_check(W: Weights, a: int, b: int, c: int, K_ab: LatticeK, K_bc: LatticeK, i: int = 0) -> bool:
    """v_ac divide el segmento [v_ab, v_bc] en razón c-b : b-a."""
    K_ac = lattice_k(W, [x + y for x, y in zip(K_ab.k, K_bc.k)])
    v_ab = intersection_point(W, a, b, K_ab, i)
    v_bc = intersection_point(W, b, c, K_bc, i)
    v_ac = intersection_point(W, a, c, K_ac, i)
    expected = tuple(((b - a) * x + (c - b) * y) / (c - a) for x, y in zip(v_ab, v_bc))
    return expected == v_ac


def image_on_boundary(W: Weights, a: int, b: int, c: int, K_ab: LatticeK, K_bc: LatticeK, i: int = 0) -> bool:
    """
    La imagen del árbol gradiente está contenida en una faceta de P,
    es decir, v_ab, v_bc y v_ac comparten una coordenada baricéntrica nula.
    Para a = b = c la imagen no queda restringida y se devuelve False.
    """
    points = []
    if a < b:
        points.append(intersection_point(W, a, b, K_ab, i))
    if b < c:
        points.append(intersection_point(W, b, c, K_bc, i))
    if not points:
        return False
    bary = [barycentric(W, i, p) for p in points]
    return any(all(t[j] == 0 for t in bary) for j in range(W.n + 1))


def _products_for(W: Weights, homs: dict, a: int, b: int, c: int) -> list[ProductEntry]:
    entries = []
    for g1 in homs[(a, b)].gens:
        for g2 in homs[(b, c)].gens:
            target, weight = compose(W, g1, g2)
            entries.append(ProductEntry(
                src1=g1.key, src2=g2.key, dst=target.key, weight=weight, approx=to_float(weight)))
    return entries


def build_category(W: Weights, q_base: int = 0, chart: int = 0,
                   unit: Optional[Sequence[int]] = None, threads: Optional[int] = None) -> CategoryData:
    """
    Construye Mo_E(P) para E = (L_q, ..., L_{q+R}), R = sum(q) - 1.

    Args:
        W: Pesos
        q_base: Primer objeto q
        chart: Carta en la que se expresan los puntos
        unit: Representante alternativo de u para los levantamientos
        threads: Número de hilos para los productos

    Returns:
        CategoryData inmutable
    """
    R = exceptional_max_R(W)
    labels = list(range(q_base, q_base + R + 1))
    objects = tuple(canonical_lift(W, a, unit) for a in labels)
    homs = {(a, b): hom_basis(W, a, b, chart) for a in labels for b in labels}

    triples = [(a, b, c) for a in labels for b in labels for c in labels if a <= b <= c]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        chunks = list(pool.map(lambda t: _products_for(W, homs, *t), triples))
    products = tuple(entry for chunk in chunks for entry in chunk)

    logger.info("Built Mo_E(P) for q=%s: %d objects, %d generators, %d products",
                W.q, len(objects), sum(h.dim for h in homs.values()), len(products))
    return CategoryData(
        weights=W,
        base=q_base,
        chart=chart,
        objects=objects,
        homs=tuple(homs[(a, b)] for a in labels for b in labels),
        products=products,
    )


def associativity_failures(cat: CategoryData) -> list[tuple[GenKey, GenKey, GenKey]]:
    """Ternas componibles donde (g1 g2) g3 y g1 (g2 g3) difieren."""
    table = cat.product_table()
    by_source: dict[int, list[GenKey]] = {}
    for basis in cat.homs:
        if basis.a <= basis.b:
            by_source.setdefault(basis.a, []).extend(g.key for g in basis.gens)

    failures = []
    for (k1, k2), left in table.items():
        for k3 in by_source.get(k2.b, []):
            p12_3 = table[(left.dst, k3)]
            p23 = table[(k2, k3)]
            p1_23 = table[(k1, p23.dst)]
            lhs = pe_mul_pow([(left.weight, 1), (p12_3.weight, 1)])
            rhs = pe_mul_pow([(p23.weight, 1), (p1_23.weight, 1)])
            if p12_3.dst != p1_23.dst or not pe_eq(lhs, rhs):
                failures.append((k1, k2, k3))
    return failures


def check_associativity(cat: CategoryData) -> bool:
    return not associativity_failures(cat)


def _fraction_pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def category_to_json(cat: CategoryData) -> str:
    """
    Serialización determinista: claves ordenadas y K en orden canónico.
    """
    def key_json(key: GenKey) -> dict:
        return {"a": key.a, "b": key.b, "K": list(key.k)}

    homs = []
    for basis in cat.homs:
        for g in basis.gens:
            homs.append({
                "a": g.a,
                "b": g.b,
                "K": list(g.K.k),
                "degree": g.degree,
                "identity": g.is_identity,
                "v": None if g.v is None else [_fraction_pair(x) for x in g.v],
            })
    payload = {
        "weights": list(cat.weights.q),
        "base": cat.base,
        "chart": cat.chart,
        "objects": [{"a": o.a, "Ka": list(o.Ka)} for o in cat.objects],
        "homs": homs,
        "products": [
            {
                "src1": key_json(p.src1),
                "src2": key_json(p.src2),
                "dst": key_json(p.dst),
                "weight": p.weight.model_dump(),
                "approx": p.approx,
            }
            for p in cat.products
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
