"""
Suites de verificación de `verify`. Cada suite devuelve un SuiteReport;
una identidad fallida se anota, nunca se lanza.
"""
import json
import logging
import math
from itertools import islice
from typing import Callable, Iterator, Optional

import numpy as np

from src.models.flow import (
    build_gradient_tree,
    inverse_moment,
    integrate_trajectory,
    kahler_potential,
    moment_jacobian,
    moment_map,
    straightness,
    trajectory_error,
)
from src.models.mirror import max_modulus_scan, verify_functor
from src.models.morse import (
    associativity_failures,
    build_category,
    canonical_lift,
    eval_potential,
    image_on_boundary,
    lift_potential,
    ratio_check,
    relative_potential,
    section_value,
    shifted_lift,
    unit_vector,
)
from src.schemas.category import CategoryData
from src.schemas.morphism import MorphismGen
from src.schemas.reports import CheckResult, SuiteReport
from src.schemas.weights import Weights
from src.utils.exact import lv_add, lv_neg
from src.utils.homs import (
    exceptional_max_R,
    exceptional_violations,
    hilbert_dims_oracle,
    hom_dimension_table,
)
from src.utils.lattice import (
    apply_transform,
    chart_transform,
    compose_transforms,
    local_group_order,
    random_interior_points,
    transform_equal,
)

logger = logging.getLogger(__name__)

FD_STEP = 1e-6
FD_TOLERANCE = 1e-6
ROUNDTRIP_TOLERANCE = 1e-10
RK4_TOLERANCE = 1e-8
MEETING_TOLERANCE = 1e-8
AREA_TOLERANCE = 1e-9
FLOW_SAMPLES = 100
MAX_TRAJECTORIES = 5
MAX_TREES = 10


def default_grid(W: Weights) -> int:
    """Resolución del barrido: 100 para n = 1, 50 para n = 2, 12 en adelante."""
    return {1: 100, 2: 50}.get(W.n, 12)


class SuiteContext:
    """Datos compartidos por las suites de una ejecución."""

    def __init__(self, W: Weights, base: int = 0, chart: int = 0, grid: Optional[int] = None,
                 seed: int = 0, threads: Optional[int] = None, category: Optional[CategoryData] = None):
        self.W = W
        self.base = base
        self.chart = chart
        self.grid = grid or default_grid(W)
        self.seed = seed
        self.threads = threads
        self._category = category

    @property
    def category(self) -> CategoryData:
        if self._category is None:
            self._category = build_category(self.W, self.base, self.chart, threads=self.threads)
        return self._category

    def forward_gens(self) -> Iterator[MorphismGen]:
        """Generadores no identidad con a < b."""
        for basis in self.category.homs:
            if basis.a < basis.b:
                yield from basis.gens

    def composable_pairs(self) -> Iterator[tuple[MorphismGen, MorphismGen]]:
        """Pares (V_ab, V_bc) con a < b < c."""
        labels = self.category.labels
        for a in labels:
            for b in labels:
                for c in labels:
                    if a < b < c:
                        for g1 in self.category.hom(a, b).gens:
                            for g2 in self.category.hom(b, c).gens:
                                yield g1, g2

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _check(report: SuiteReport, item: str, passed: bool, expected=None, got=None) -> None:
    report.record(CheckResult(suite=report.suite, item=item, expected=expected, got=got, passed=bool(passed)))


def suite_dims(ctx: SuiteContext) -> SuiteReport:
    """Dimensiones de los hom frente al oráculo de Hilbert y grados nulos."""
    report = SuiteReport(suite="dims")
    W, cat = ctx.W, ctx.category
    R = exceptional_max_R(W)
    oracle = hilbert_dims_oracle(W, R)
    table = hom_dimension_table(W, R)
    for d in range(R + 1):
        _check(report, f"dim S_{d}", table[d] == oracle[d], oracle[d], table[d])
    for basis in cat.homs:
        d = basis.b - basis.a
        expected = oracle[d] if d >= 0 else 0
        _check(report, f"Hom(L_{basis.a}, L_{basis.b})", basis.dim == expected, expected, basis.dim)
    # m1 y m_k (k >= 3) se anulan: todos los generadores tienen grado 0
    degrees = sorted({g.degree for basis in cat.homs for g in basis.gens})
    _check(report, "generator degrees", degrees == [0], [0], degrees)
    return report


def suite_exceptional(ctx: SuiteContext) -> SuiteReport:
    report = SuiteReport(suite="exceptional")
    W = ctx.W
    R = exceptional_max_R(W)
    found = exceptional_violations(W, R)
    _check(report, f"no interior generator for |b-a| <= {R}", not found, [], [list(k) for _, k in found])
    ones = (1,) * (W.n + 1)
    beyond = exceptional_violations(W, W.total)
    _check(report, f"K={ones} interior at |b-a| = {W.total}", (W.total, ones) in beyond, True,
           [list(k) for _, k in beyond])
    return report


def suite_assoc(ctx: SuiteContext) -> SuiteReport:
    report = SuiteReport(suite="assoc")
    failures = associativity_failures(ctx.category)
    for k1, k2, k3 in failures:
        _check(report, f"({k1.k}, {k2.k}, {k3.k}) from L_{k1.a}", False)
    _check(report, "composable triples", not failures, 0, len(failures))
    return report


def suite_functor(ctx: SuiteContext) -> SuiteReport:
    report = verify_functor(ctx.category, seed=ctx.seed, threads=ctx.threads)
    for g in ctx.forward_gens():
        scan = max_modulus_scan(ctx.W, g.a, g.b, g.K, ctx.grid, ctx.chart)
        _check(report, f"max |c psi| for {g.a}->{g.b} K={g.K.k}", scan.passed,
               {"max": 1.0, "argmax": scan.v}, {"max": scan.max_value, "argmax": scan.argmax})
    return report


def suite_ratio(ctx: SuiteContext) -> SuiteReport:
    report = SuiteReport(suite="ratio")
    W, i = ctx.W, ctx.chart
    for g1, g2 in ctx.composable_pairs():
        _check(report, f"v_ac for {g1.a}<{g1.b}<{g2.b} K={g1.K.k},{g2.K.k}",
               ratio_check(W, g1.a, g1.b, g2.b, g1.K, g2.K, i))
    return report


def _weight_multiset(cat: CategoryData) -> list[str]:
    return sorted(json.dumps(p.weight.model_dump()) for p in cat.products)


def suite_charts(ctx: SuiteContext) -> SuiteReport:
    """Independencia de la carta: dimensiones, pesos y puntos transformados."""
    report = SuiteReport(suite="charts")
    W, cat = ctx.W, ctx.category
    for j in range(W.n + 1):
        _check(report, f"local group order chart {j}", local_group_order(W, j) == W.q[j], W.q[j])
        if j == cat.chart:
            continue
        other = build_category(W, ctx.base, j, threads=ctx.threads)
        _check(report, f"hom dims chart {cat.chart} vs {j}",
               [h.dim for h in cat.homs] == [h.dim for h in other.homs])
        _check(report, f"product weights chart {cat.chart} vs {j}",
               _weight_multiset(cat) == _weight_multiset(other))
        T = chart_transform(W, cat.chart, j)
        moved = all(
            apply_transform(T, g.v) == other.generator(g.key).v
            for basis in cat.homs for g in basis.gens if g.v is not None
        )
        _check(report, f"intersection points chart {cat.chart} -> {j}", moved)
        for k in range(W.n + 1):
            composed = compose_transforms(chart_transform(W, j, k), T)
            _check(report, f"transform {cat.chart}->{j}->{k}",
                   transform_equal(composed, chart_transform(W, cat.chart, k)))
    return report


def _flow_moment_checks(ctx: SuiteContext, report: SuiteReport) -> None:
    W, i = ctx.W, ctx.chart
    rng = ctx.rng()
    n = W.n
    for xc in rng.uniform(-1.0, 1.0, size=(FLOW_SAMPLES, n)):
        x = moment_map(W, i, xc)
        J = moment_jacobian(W, i, xc)
        fd_grad = np.empty(n)
        fd_jac = np.empty((n, n))
        for m in range(n):
            h = np.zeros(n)
            h[m] = FD_STEP
            fd_grad[m] = (kahler_potential(W, i, xc + h) - kahler_potential(W, i, xc - h)) / (2 * FD_STEP)
            fd_jac[:, m] = (moment_map(W, i, xc + h) - moment_map(W, i, xc - h)) / (2 * FD_STEP)
        scale = max(1.0, float(np.max(np.abs(x))))
        _check(report, f"moment_map vs finite differences at {xc.tolist()}",
               np.max(np.abs(x - fd_grad)) < FD_TOLERANCE * scale)
        _check(report, f"Jacobian SPD at {xc.tolist()}",
               np.allclose(J, J.T) and np.linalg.eigvalsh(J).min() > 0
               and np.max(np.abs(J - fd_jac)) < FD_TOLERANCE * max(1.0, float(np.max(np.abs(J)))))

    for point in random_interior_points(W, i, FLOW_SAMPLES, rng):
        x = np.array([float(xl) for xl in point])
        err = float(np.max(np.abs(moment_map(W, i, inverse_moment(W, i, x)) - x)))
        _check(report, f"inverse_moment roundtrip at {x.tolist()}", err < ROUNDTRIP_TOLERANCE,
               ROUNDTRIP_TOLERANCE, err)


def _flow_trajectory_checks(ctx: SuiteContext, report: SuiteReport) -> None:
    W, i = ctx.W, ctx.chart
    rng = ctx.rng()
    for g in islice(ctx.forward_gens(), MAX_TRAJECTORIES):
        x0 = [float(xl) for xl in random_interior_points(W, i, 1, rng)[0]]
        lam = 2 * math.pi * (g.b - g.a) / W.scale
        steps = int(10 / (lam * 1e-3))
        for backward in (False, True):
            traj = integrate_trajectory(W, g.a, g.b, g.K, x0, steps=steps, backward=backward, i=i)
            # Hacia atrás la trayectoria contrae y la cota es absoluta
            err = trajectory_error(traj, relative=not backward)
            label = "backward" if backward else "forward"
            _check(report, f"RK4 {label} {g.a}->{g.b} K={g.K.k}", err < RK4_TOLERANCE, RK4_TOLERANCE, err)
            # Las trayectorias son rectas; tolerancia relativa al tamaño de la muestra
            size = max(1.0, float(np.max(np.abs(traj.samples))))
            _check(report, f"straight {label} {g.a}->{g.b} K={g.K.k}", straightness(traj) < 1e-9 * size)


def _flow_tree_checks(ctx: SuiteContext, report: SuiteReport) -> None:
    for g1, g2 in islice(ctx.composable_pairs(), MAX_TREES):
        tree = build_gradient_tree(ctx.W, g1.a, g1.b, g2.b, g1.K, g2.K, ctx.chart)
        item = f"tree {g1.a}<{g1.b}<{g2.b} K={g1.K.k},{g2.K.k}"
        _check(report, f"{item} meeting", tree.meeting_residual < MEETING_TOLERANCE,
               MEETING_TOLERANCE, tree.meeting_residual)
        _check(report, f"{item} area", tree.area_error < AREA_TOLERANCE, tree.area_exact, tree.area_numeric)
        _check(report, f"{item} root", tree.root_field_norm < MEETING_TOLERANCE, 0.0, tree.root_field_norm)


def suite_flow(ctx: SuiteContext) -> SuiteReport:
    report = SuiteReport(suite="flow")
    _flow_moment_checks(ctx, report)
    _flow_trajectory_checks(ctx, report)
    _flow_tree_checks(ctx, report)
    return report


def alternative_unit(W: Weights) -> tuple[int, ...]:
    """u' = u + (q1, -q0, 0, ..., 0), otro representante de sum(q u) = 1."""
    u = list(unit_vector(W))
    u[0] += W.q[1]
    u[1] -= W.q[0]
    return tuple(u)


def _products_json(cat: CategoryData) -> str:
    return json.dumps([
        [p.src1.a, p.src1.b, list(p.src1.k), p.src2.b, list(p.src2.k), list(p.dst.k), p.weight.model_dump()]
        for p in cat.products
    ])


def suite_lifts(ctx: SuiteContext) -> SuiteReport:
    """Los pesos no dependen del representante u de los levantamientos."""
    report = SuiteReport(suite="lifts")
    other = build_category(ctx.W, ctx.base, ctx.chart, unit=alternative_unit(ctx.W), threads=ctx.threads)
    _check(report, f"unit {alternative_unit(ctx.W)} vs {unit_vector(ctx.W)}",
           _products_json(other) == _products_json(ctx.category))
    return report


def suite_potentials(ctx: SuiteContext) -> SuiteReport:
    """s_b - s_a se anula en v y f_b - f_a - f_ab es constante."""
    report = SuiteReport(suite="potentials")
    W, i = ctx.W, ctx.chart
    rng = ctx.rng()
    for g in ctx.forward_gens():
        lift_a = canonical_lift(W, g.a)
        lift_b = shifted_lift(lift_a, g.K)
        _check(report, f"s_b = s_a at v for {g.a}->{g.b} K={g.K.k}",
               section_value(W, lift_a, i, g.v) == section_value(W, lift_b, i, g.v))

        f_a, f_b = lift_potential(W, lift_a, i), lift_potential(W, lift_b, i)
        f_ab = relative_potential(W, g.a, g.b, g.K, i)
        gaps = {
            lv_add(eval_potential(f_b, x), lv_neg(eval_potential(f_a, x)), lv_neg(eval_potential(f_ab, x)))
            for x in random_interior_points(W, i, 3, rng)
        }
        _check(report, f"f_b - f_a - f_ab constant for {g.a}->{g.b} K={g.K.k}", len(gaps) == 1)
    return report


def suite_trees(ctx: SuiteContext) -> SuiteReport:
    """La imagen de cada árbol gradiente está en la frontera de P."""
    report = SuiteReport(suite="trees")
    for g1, g2 in ctx.composable_pairs():
        _check(report, f"image of {g1.a}<{g1.b}<{g2.b} K={g1.K.k},{g2.K.k} in boundary",
               image_on_boundary(ctx.W, g1.a, g1.b, g2.b, g1.K, g2.K, ctx.chart))
    return report


def suite_translation(ctx: SuiteContext) -> SuiteReport:
    """Reconstruir con base q+1 da los mismos pesos relativos."""
    report = SuiteReport(suite="translation")
    shifted = build_category(ctx.W, ctx.base + 1, ctx.chart, threads=ctx.threads)

    def relative(cat: CategoryData) -> list[str]:
        return sorted(json.dumps([
            p.src1.a - cat.base, p.src1.b - cat.base, list(p.src1.k),
            p.src2.b - cat.base, list(p.src2.k), p.weight.model_dump(),
        ]) for p in cat.products)

    _check(report, f"base {ctx.base} vs {ctx.base + 1}", relative(ctx.category) == relative(shifted))
    return report


SUITE_RUNNERS: dict[str, Callable[[SuiteContext], SuiteReport]] = {
    "dims": suite_dims,
    "exceptional": suite_exceptional,
    "assoc": suite_assoc,
    "functor": suite_functor,
    "ratio": suite_ratio,
    "charts": suite_charts,
    "flow": suite_flow,
    "lifts": suite_lifts,
    "potentials": suite_potentials,
    "trees": suite_trees,
}


def run_suites(ctx: SuiteContext, suite: str = "all") -> list[SuiteReport]:
    """Ejecuta una suite o todas (más la invariancia por traslación de la base)."""
    if suite == "all":
        names = list(SUITE_RUNNERS)
    elif suite in SUITE_RUNNERS:
        names = [suite]
    else:
        raise ValueError(f"Unknown suite {suite!r}")

    reports = []
    for name in names:
        logger.info("Running suite %s for q=%s", name, ctx.W.q)
        reports.append(SUITE_RUNNERS[name](ctx))
    if suite == "all":
        reports.append(suite_translation(ctx))
    for report in reports:
        logger.info("Suite %s: %d checks, %s", report.suite, report.checked,
                    "pass" if report.passed else f"{len(report.failures)} failures")
    return reports
