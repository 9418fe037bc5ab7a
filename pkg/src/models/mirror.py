"""
Lado espejo: generadores psi_{ab;K}, constantes de reescalado c_{ab;K} y el
funtor iota: V_{ab;K} -> e_{ab;K} = c_{ab;K} psi_{ab;K}.

Las fases exp(i K.y) se llevan como etiquetas enteras; todas las
comparaciones se hacen sobre módulos exactos (PosExact) más la igualdad de
etiquetas K_ab + K_bc = K_ac.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from src.schemas.category import CategoryData, ProductEntry
from src.schemas.morphism import GenKey, LatticeK, MirrorGen
from src.schemas.base import PosExact
from src.schemas.reports import CheckResult, ScanReport, SuiteReport
from src.schemas.weights import Weights
from src.utils.errors import ExactDomainError
from src.utils.exact import exp_of, factor_positive, lv_neg, pe_eq, pe_inv, pe_mul_pow, pos_exact
from src.utils.homs import check_degree, intersection_point, lattice_k
from src.utils.lattice import barycentric, random_interior_points
from src.models.morse import eval_potential, relative_potential

logger = logging.getLogger(__name__)

# Tolerancia de la cota superior del barrido
SCAN_TOLERANCE = 1e-12


def psi_abs_at(W: Weights, a: int, b: int, K: LatticeK, i: int, x: Sequence[Fraction]) -> PosExact:
    """
    |psi_{ab;K}(x)| = prod_j t_j ^ (q_j k_j / 2q0...qn), donde t_j son las
    coordenadas baricéntricas de x (t_j = arg_j / 2q0...qn).

    Convenio 0^0 = 1: los factores con k_j = 0 se omiten.

    Raises:
        ExactDomainError: si una base no positiva lleva exponente no nulo
    """
    check_degree(W, a, b, K)
    t = barycentric(W, i, x)
    terms = []
    for tj, qj, kj in zip(t, W.q, K.k):
        if kj == 0:
            continue
        if tj <= 0:
            raise ExactDomainError(f"|psi| base {tj} is not positive at {tuple(x)} (k={K.k})")
        terms.append((factor_positive(tj), Fraction(qj * kj, W.scale)))
    return pe_mul_pow(terms)


def rescale_const(W: Weights, a: int, b: int, K: LatticeK) -> PosExact:
    """c_{ab;K} = 1 / |psi(v_{ab;K})|; para a = b (K = 0) es 1."""
    if a == b:
        check_degree(W, a, b, K)
        return pos_exact()
    v = intersection_point(W, a, b, K, 0)
    return pe_inv(psi_abs_at(W, a, b, K, 0, v))


def mirror_generator(W: Weights, a: int, b: int, K: LatticeK, i: int = 0) -> MirrorGen:
    return MirrorGen(a=a, b=b, K=K, c=rescale_const(W, a, b, K), chart=i, phase_K=K.k)


def mirror_structure_constant(W: Weights, a: int, b: int, c: int,
                              K_ab: LatticeK, K_bc: LatticeK) -> PosExact:
    """
    Constante de e_ab * e_bc = (c_ab c_bc / c_ac) e_ac, usando que
    psi_ab * psi_bc = psi_ac monomialmente con K_ac = K_ab + K_bc.
    """
    K_ac = lattice_k(W, [x + y for x, y in zip(K_ab.k, K_bc.k)])
    c_ab = rescale_const(W, a, b, K_ab)
    c_bc = rescale_const(W, b, c, K_bc)
    c_ac = rescale_const(W, a, c, K_ac)
    return pe_mul_pow([(c_ab, 1), (c_bc, 1), (c_ac, -1)])


def phase_compatible(g_ab: MirrorGen, g_bc: MirrorGen, g_ac: MirrorGen) -> bool:
    return tuple(x + y for x, y in zip(g_ab.phase_K, g_bc.phase_K)) == g_ac.phase_K


def potential_vs_mirror(W: Weights, a: int, b: int, K: LatticeK, i: int,
                        x: Sequence[Fraction]) -> bool:
    """exp(-f_ab(x)/2pi) = c_{ab;K} |psi_{ab;K}(x)| exactamente en x."""
    if a == b:
        return pe_eq(psi_abs_at(W, a, b, K, i, x), pos_exact())
    lhs = exp_of(lv_neg(eval_potential(relative_potential(W, a, b, K, i), x)))
    rhs = pe_mul_pow([(rescale_const(W, a, b, K), 1), (psi_abs_at(W, a, b, K, i, x), 1)])
    return pe_eq(lhs, rhs)


def _label(key: GenKey) -> str:
    return f"V[{key.a},{key.b};{','.join(str(k) for k in key.k)}]"


def _check_product(W: Weights, entry: ProductEntry) -> CheckResult:
    s1, s2 = entry.src1, entry.src2
    K_ab = LatticeK(k=s1.k, d=abs(s1.b - s1.a))
    K_bc = LatticeK(k=s2.k, d=abs(s2.b - s2.a))
    expected = mirror_structure_constant(W, s1.a, s1.b, s2.b, K_ab, K_bc)
    phase_ok = entry.dst.k == tuple(x + y for x, y in zip(s1.k, s2.k))
    return CheckResult(
        suite="functor",
        item=f"m2({_label(s1)}, {_label(s2)})",
        expected=expected.model_dump(),
        got=entry.weight.model_dump(),
        passed=phase_ok and pe_eq(expected, entry.weight),
    )


def _check_pointwise(W: Weights, a: int, b: int, K: LatticeK, i: int,
                     x: tuple[Fraction, ...]) -> CheckResult:
    key = GenKey(a=a, b=b, k=K.k)
    return CheckResult(
        suite="functor",
        item=f"{_label(key)} at {[str(xl) for xl in x]}",
        expected="exp(-f/2pi) = c|psi|",
        got=None,
        passed=potential_vs_mirror(W, a, b, K, i, x),
    )


def verify_functor(cat: CategoryData, points: int = 5, seed: int = 0,
                   threads: Optional[int] = None) -> SuiteReport:
    """
    Comprueba que iota respeta m2 y la identidad puntual exp(-f) = c|psi|.

    Args:
        cat: Categoría construida
        points: Puntos racionales interiores por generador
        seed: Semilla del muestreo
        threads: Hilos del pool

    Returns:
        SuiteReport con los fallos; nunca lanza por una identidad fallida
    """
    W, i = cat.weights, cat.chart
    rng = np.random.default_rng(seed)

    # Los puntos se sortean antes de repartir el trabajo para que el informe
    # no dependa del número de hilos
    jobs = []
    for basis in cat.homs:
        if basis.a > basis.b:
            continue
        for g in basis.gens:
            for x in random_interior_points(W, i, points, rng):
                jobs.append((g.a, g.b, g.K, x))

    report = SuiteReport(suite="functor")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for result in pool.map(lambda p: _check_product(W, p), cat.products):
            report.record(result)
        for result in pool.map(lambda job: _check_pointwise(W, *job[:3], i, job[3]), jobs):
            report.record(result)

    logger.info("Functor check for q=%s: %d checks, %d failures",
                W.q, report.checked, len(report.failures))
    return report


def _simplex_grid(n: int, m: int) -> np.ndarray:
    """Enteros g >= 0 con n componentes y sum(g) <= m."""
    g = np.indices((m + 1,) * n).reshape(n, -1).T
    return g[g.sum(axis=1) <= m]


def _separation(m: int) -> float:
    # Caída mínima esperada fuera de la celda de v
    return 1e-3 / m**2


def max_modulus_scan(W: Weights, a: int, b: int, K: LatticeK, m: int, i: int = 0) -> ScanReport:
    """
    Barre |c psi| sobre la rejilla t = g/m del símplice y comprueba que el
    máximo vale 1 y solo se alcanza en la celda que contiene v_{ab;K}.

    El barrido se hace en coma flotante con numpy; el valor en v se
    comprueba en aritmética exacta.
    """
    check_degree(W, a, b, K)
    if a == b:
        return ScanReport(a=a, b=b, K=K.k, grid=m, identity=True)

    d = abs(b - a)
    others = W.others(i)
    grid = _simplex_grid(W.n, m)
    G = np.zeros((grid.shape[0], W.n + 1), dtype=np.int64)
    G[:, list(others)] = grid
    G[:, i] = m - grid.sum(axis=1)

    exponents = np.array([qj * kj / W.scale for qj, kj in zip(W.q, K.k)])
    t_v = np.array([qj * kj / d for qj, kj in zip(W.q, K.k)])
    active = exponents > 0

    with np.errstate(divide="ignore"):
        logs = np.log(G[:, active] / m) - np.log(t_v[active])
    values = np.exp(logs @ exponents[active])

    in_cell = np.max(np.abs(G - m * t_v), axis=1) < 1
    best = int(np.argmax(values))
    outside = values[~in_cell]
    unique = bool(in_cell[best]) and bool(np.all(outside < 1 - _separation(m)))

    v = intersection_point(W, a, b, K, i)
    exact = pe_mul_pow([(rescale_const(W, a, b, K), 1), (psi_abs_at(W, a, b, K, i, v), 1)])

    def to_chart(row) -> list[float]:
        return [W.scale * float(row[l]) / (m * W.q[l]) for l in others]

    report = ScanReport(
        a=a, b=b, K=K.k, grid=m,
        points=int(values.size),
        max_value=float(values[best]),
        argmax=to_chart(G[best]),
        v=[float(xl) for xl in v],
        bounded=bool(values.max() <= 1 + SCAN_TOLERANCE),
        unique=unique,
        exact_at_v=pe_eq(exact, pos_exact()),
    )
    logger.debug("Scan %s: max %.15g at %s", K.k, report.max_value, report.argmax)
    return report
