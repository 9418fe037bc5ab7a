"""
Simulación en coma flotante: coordenadas de Legendre (mapa de momento),
campos gradiente afines, trayectorias RK4 y árboles gradiente de m2.

El flujo se integra en coordenadas de momento x, donde el campo de
f_{ab;K} es afín: x' = 2pi((b-a) x / 2q0...qn - K).
"""
import csv
import io
import json
import logging
import math
from fractions import Fraction
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy.integrate import quad
from scipy.special import logsumexp, softmax

from src.models.morse import eval_potential, potential_gradient, relative_potential
from src.schemas.morphism import LatticeK
from src.schemas.reports import GradientTree, TreeEdge, Trajectory
from src.schemas.weights import Weights
from src.utils.errors import CompositionError, FlowError
from src.utils.exact import lv_add, to_float
from src.utils.homs import check_degree, intersection_point, lattice_k

logger = logging.getLogger(__name__)

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-12
RK4_DT = 1e-3


def _rates(W: Weights, i: int) -> np.ndarray:
    """c_l = 2q0...qn / q_l para l != i."""
    return np.array([W.scale / W.q[l] for l in W.others(i)], dtype=float)


def kahler_potential(W: Weights, i: int, xc: Sequence[float]) -> float:
    """phi_i = log(1 + sum_l exp(c_l xc_l)), estabilizado con logsumexp."""
    z = _rates(W, i) * np.asarray(xc, dtype=float)
    return float(logsumexp(np.concatenate(([0.0], z))))


def moment_map(W: Weights, i: int, xc: Sequence[float]) -> np.ndarray:
    """x_l = d phi_i / d xc_l = c_l exp(c_l xc_l) / (1 + sum exp(c_j xc_j))."""
    c = _rates(W, i)
    s = softmax(np.concatenate(([0.0], c * np.asarray(xc, dtype=float))))
    return c * s[1:]


def moment_jacobian(W: Weights, i: int, xc: Sequence[float]) -> np.ndarray:
    """Hessiana de phi_i: c_l c_m (delta_lm s_l - s_l s_m). Simétrica definida positiva."""
    c = _rates(W, i)
    s = softmax(np.concatenate(([0.0], c * np.asarray(xc, dtype=float))))[1:]
    return np.outer(c, c) * (np.diag(s) - np.outer(s, s))


def _is_interior_float(W: Weights, i: int, x: np.ndarray) -> bool:
    q = np.array([W.q[l] for l in W.others(i)], dtype=float)
    return bool(np.all(x > 0) and q @ x < W.scale)


def inverse_moment(W: Weights, i: int, x: Sequence[float]) -> np.ndarray:
    """
    Inversa del mapa de momento por Newton amortiguado sobre la función
    convexa phi_i(xc) - <x, xc>, empezando en xc = 0.

    Raises:
        FlowError: si x no es interior o Newton no converge
    """
    x = np.asarray([float(xl) for xl in x])
    if not _is_interior_float(W, i, x):
        raise FlowError(f"inverse_moment needs an interior point, got {x.tolist()}")

    def objective(y):
        return kahler_potential(W, i, y) - float(x @ y)

    xc = np.zeros_like(x)
    for iteration in range(NEWTON_MAX_ITER):
        residual = moment_map(W, i, xc) - x
        if np.max(np.abs(residual)) <= NEWTON_TOL * max(1.0, float(np.max(np.abs(x)))):
            logger.debug("inverse_moment converged in %d iterations", iteration)
            return xc
        step = np.linalg.solve(moment_jacobian(W, i, xc), residual)
        # Armijo sobre el objetivo; cerca de la solución basta con que baje el residuo
        value, norm, t = objective(xc), float(np.linalg.norm(residual)), 1.0
        slope = float(residual @ step)
        while t > 1e-10:
            trial = xc - t * step
            if (objective(trial) <= value - 1e-4 * t * slope
                    or np.linalg.norm(moment_map(W, i, trial) - x) < (1 - 1e-4 * t) * norm):
                break
            t *= 0.5
        xc = xc - t * step
    raise FlowError(f"inverse_moment did not converge at {x.tolist()} in {NEWTON_MAX_ITER} iterations")


def flow_rate(W: Weights, a: int, b: int) -> float:
    """lambda = 2pi (b - a) / 2q0...qn."""
    return 2 * math.pi * (b - a) / W.scale


def _as_point(W: Weights, x: Sequence[float]) -> np.ndarray:
    point = np.asarray(x, dtype=float)
    if point.shape != (W.n,):
        raise FlowError(f"expected a point with {W.n} coordinates, got {list(np.ravel(point))}")
    return point


def gradient_field(W: Weights, a: int, b: int, K: LatticeK, x: Sequence[float], i: int = 0) -> np.ndarray:
    """
    2pi((b-a) x_l / 2q0...qn - sgn(b-a) k_l); se anula en v_{ab;K}.

    K guarda |b-a| (sum q_j k_j = |b-a|), de ahí el signo para a > b.
    """
    return _affine_field(W, a, b, K, i)(_as_point(W, x))


def _affine_field(W: Weights, a: int, b: int, K: LatticeK, i: int):
    check_degree(W, a, b, K)
    sign = 1.0 if b >= a else -1.0
    k = sign * 2 * math.pi * np.array([K.k[l] for l in W.others(i)], dtype=float)
    lam = flow_rate(W, a, b)
    return lambda x: lam * x - k


def _rk4(field, x0: np.ndarray, dt: float, steps: int) -> np.ndarray:
    samples = np.empty((steps + 1, x0.size))
    samples[0] = x = x0
    for s in range(1, steps + 1):
        k1 = field(x)
        k2 = field(x + 0.5 * dt * k1)
        k3 = field(x + 0.5 * dt * k2)
        k4 = field(x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        samples[s] = x
    return samples


def integrate_trajectory(W: Weights, a: int, b: int, K: LatticeK, x0: Sequence[float],
                         dt: float = RK4_DT, steps: int = 1000, backward: bool = False,
                         i: int = 0) -> Trajectory:
    """
    Integra x' = grad f_{ab;K} con RK4 de paso fijo.

    Args:
        W: Pesos
        a, b: Etiquetas de los objetos
        K: Punto de red del generador
        x0: Punto inicial (coordenadas de la carta i)
        dt: Paso, positivo
        steps: Número de pasos
        backward: Integra hacia t negativo
        i: Carta

    Returns:
        Trajectory con tiempos y muestras
    """
    if dt <= 0:
        raise FlowError(f"dt must be positive, got {dt}")
    x0 = _as_point(W, x0)
    v = np.array([float(xl) for xl in intersection_point(W, a, b, K, i)])
    h = -dt if backward else dt
    samples = _rk4(_affine_field(W, a, b, K, i), x0, h, steps)
    return Trajectory(
        times=[h * s for s in range(steps + 1)],
        samples=samples.tolist(),
        lam=flow_rate(W, a, b),
        fixed_point=v.tolist(),
        x0=x0.tolist(),
    )


def closed_form(traj: Trajectory, t) -> np.ndarray:
    """x(t) = v + exp(lambda t)(x0 - v); t puede ser un vector de tiempos."""
    v, x0 = np.asarray(traj.fixed_point), np.asarray(traj.x0)
    growth = np.exp(traj.lam * np.asarray(t, dtype=float))
    return v + np.multiply.outer(growth, x0 - v)


def trajectory_error(traj: Trajectory, relative: bool = True) -> float:
    """
    Máximo error de las muestras frente a la forma cerrada.

    Con relative=True se divide por max(1, |x(t)|): hacia delante |x - v|
    crece como e^{lambda t} y el error de RK4 crece con él. Con
    relative=False es el error absoluto.
    """
    exact = closed_form(traj, traj.times)
    error = np.max(np.abs(np.asarray(traj.samples) - exact), axis=1)
    if relative:
        error = error / np.maximum(1.0, np.max(np.abs(exact), axis=1))
    return float(np.max(error))


def straightness(traj: Trajectory) -> float:
    """Distancia máxima de las muestras a la recta que pasa por x0 y v."""
    v = np.asarray(traj.fixed_point)
    r = np.asarray(traj.samples) - v
    direction = np.asarray(traj.x0) - v
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        return float(np.max(np.linalg.norm(r, axis=1)))
    direction /= norm
    return float(np.max(np.linalg.norm(r - np.outer(r @ direction, direction), axis=1)))


def _edge(W: Weights, a: int, b: int, K: LatticeK, i: int, start: tuple[Fraction, ...],
          end: tuple[Fraction, ...], eps: float, dt: float) -> TreeEdge:
    """
    Arista recta de start = v_{ab;K} a end = v_ac siguiendo grad f_ab.

    El punto inicial se separa eps de v; el tiempo de llegada es
    T = log(1/eps)/lambda, y el paso se ajusta para acabar exactamente en T.
    """
    p0 = np.array([float(x) for x in start])
    p1 = np.array([float(x) for x in end])
    if start == end:
        return TreeEdge(start=p0.tolist(), end=p1.tolist())

    T = math.log(1 / eps) / flow_rate(W, a, b)
    steps = max(1, math.ceil(T / dt))
    x0 = p0 + eps * (p1 - p0)
    traj = integrate_trajectory(W, a, b, K, x0, dt=T / steps, steps=steps, i=i)

    potential = relative_potential(W, a, b, K, i)
    direction = p1 - p0
    area, _ = quad(lambda s: float(np.dot(potential_gradient(potential, p0 + s * direction), direction)),
                   0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    return TreeEdge(
        start=p0.tolist(),
        end=traj.samples[-1],
        trajectory=traj,
        straightness=straightness(traj),
        residual=float(np.max(np.abs(np.asarray(traj.samples[-1]) - p1))),
        area_numeric=area,
    )


def build_gradient_tree(W: Weights, a: int, b: int, c: int, K_ab: LatticeK, K_bc: LatticeK,
                        i: int = 0, eps: float = 1e-3, dt: float = RK4_DT) -> GradientTree:
    """
    Árbol gradiente de m2(V_ab, V_bc): dos aristas rectas v_ab -> v_ac y
    v_bc -> v_ac, y la raíz estacionaria en v_ac.

    El área numérica integra grad f a lo largo de cada arista con quad y se
    compara con el valor exacto f_ab(v_ac) + f_bc(v_ac).
    """
    if not a < b < c:
        raise CompositionError(f"Gradient trees need a < b < c, got {a}, {b}, {c}")
    K_ac = lattice_k(W, [x + y for x, y in zip(K_ab.k, K_bc.k)])
    v_ab = intersection_point(W, a, b, K_ab, i)
    v_bc = intersection_point(W, b, c, K_bc, i)
    v_ac = intersection_point(W, a, c, K_ac, i)

    edges = [_edge(W, a, b, K_ab, i, v_ab, v_ac, eps, dt), _edge(W, b, c, K_bc, i, v_bc, v_ac, eps, dt)]
    root = gradient_field(W, a, b, K_ab, [float(x) for x in v_ac], i) \
        + gradient_field(W, b, c, K_bc, [float(x) for x in v_ac], i)

    exact = lv_add(eval_potential(relative_potential(W, a, b, K_ab, i), v_ac),
                   eval_potential(relative_potential(W, b, c, K_bc, i), v_ac))
    tree = GradientTree(
        a=a, b=b, c=c, K_ab=K_ab.k, K_bc=K_bc.k,
        v_ab=[float(x) for x in v_ab],
        v_bc=[float(x) for x in v_bc],
        v_ac=[float(x) for x in v_ac],
        edges=edges,
        root_field_norm=float(np.linalg.norm(root)),
        meeting_residual=max(e.residual for e in edges),
        area_numeric=sum(e.area_numeric for e in edges),
        area_exact=to_float(exact),
        degenerate=v_ab == v_bc == v_ac,
    )
    logger.debug("Tree (%d,%d,%d) %s %s: residual %.3g, area error %.3g",
                 a, b, c, K_ab.k, K_bc.k, tree.meeting_residual, tree.area_error)
    return tree


def write_trajectory_csv(traj: Trajectory, out: Optional[TextIO] = None) -> str:
    """CSV con cabecera t,x1..xn (comillas RFC-4180 del módulo csv)."""
    buffer = out if out is not None else io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    n = len(traj.x0)
    writer.writerow(["t", *(f"x{l + 1}" for l in range(n))])
    for t, x in zip(traj.times, traj.samples):
        writer.writerow([repr(t), *(repr(xl) for xl in x)])
    return buffer.getvalue() if out is None else ""


def tree_summary_json(tree: GradientTree) -> str:
    """Resumen del árbol sin las muestras de las trayectorias."""
    payload = tree.model_dump(exclude={"edges": {"__all__": {"trajectory"}}})
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
