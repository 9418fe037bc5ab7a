"""
Bases de los espacios de morfismos como puntos de red, grados, cota de la
colección excepcional y el oráculo de fuerza bruta del anillo graduado
S = C[z_0..z_n], deg z_i = q_i.
"""
import logging
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from src.schemas.morphism import HomBasis, LatticeK, MorphismGen
from src.schemas.weights import Weights
from src.utils.errors import DegreeMismatchError
from src.utils.lattice import point_from_barycentric

logger = logging.getLogger(__name__)


def lattice_k(W: Weights, k: Sequence[int]) -> LatticeK:
    """Construye LatticeK recalculando el grado."""
    k = tuple(int(kj) for kj in k)
    if len(k) != W.n + 1:
        raise DegreeMismatchError(f"K needs {W.n + 1} entries, got {k}")
    return LatticeK(k=k, d=sum(qj * kj for qj, kj in zip(W.q, k)))


def _descend(q: tuple[int, ...], d: int, j: int) -> Iterator[tuple[int, ...]]:
    if j == len(q) - 1:
        if d % q[j] == 0:
            yield (d // q[j],)
        return
    # De mayor a menor: orden lexicográfico descendente
    for kj in range(d // q[j], -1, -1):
        yield from ((kj, *rest) for rest in _descend(q, d - q[j] * kj, j + 1))


def weighted_compositions(W: Weights, d: int) -> list[LatticeK]:
    """
    Todas las soluciones K >= 0 de sum(q_j k_j) = d.

    Returns:
        Lista sin duplicados en orden lexicográfico descendente, que es el
        orden canónico de las bases
    """
    if d < 0:
        return []
    return [LatticeK(k=k, d=d) for k in _descend(W.q, d, 0)]


def hilbert_dims_oracle(W: Weights, d_max: int) -> list[int]:
    """
    dim S_d para d = 0..d_max por enumeración de todos los monomios de la
    caja 0 <= k_j <= d_max // q_j.  No usa weighted_compositions.
    """
    if d_max < 0:
        return []
    axes = [np.arange(d_max // qj + 1, dtype=np.int64) * qj for qj in W.q]
    degrees = axes[0]
    for axis in axes[1:]:
        degrees = np.add.outer(degrees, axis)
        # Podar lo que ya supera d_max
        degrees = np.where(degrees <= d_max, degrees, d_max + 1)
    counts = np.bincount(degrees.ravel(), minlength=d_max + 2)
    return [int(c) for c in counts[: d_max + 1]]


def hilbert_dim_oracle(W: Weights, d: int) -> int:
    """dim S_d por fuerza bruta."""
    if d < 0:
        return 0
    return hilbert_dims_oracle(W, d)[d]


def hom_dimension_table(W: Weights, R: int) -> dict[int, int]:
    return {d: len(weighted_compositions(W, d)) for d in range(R + 1)}


def exceptional_max_R(W: Weights) -> int:
    """Mayor R con E_R fuertemente excepcional: sum(q_j) - 1."""
    return W.total - 1


def exceptional_violations(W: Weights, R: int) -> list[tuple[int, tuple[int, ...]]]:
    """
    Generadores interiores (todos los k_j >= 1) que aparecen en E_R para
    0 < |b - a| <= R.  La lista es vacía si y solo si R <= sum(q) - 1.
    """
    found = []
    for d in range(1, R + 1):
        for K in weighted_compositions(W, d):
            if all(kj >= 1 for kj in K.k):
                found.append((d, K.k))
    return found


def check_degree(W: Weights, a: int, b: int, K: LatticeK) -> None:
    expected = abs(b - a)
    actual = sum(qj * kj for qj, kj in zip(W.q, K.k))
    if len(K.k) != W.n + 1 or actual != expected or K.d != actual:
        raise DegreeMismatchError(
            f"K={K.k} has degree {actual} (stored {K.d}) but |b-a| = {expected}")


def generator_degree(W: Weights, a: int, b: int, K: LatticeK) -> Optional[int]:
    """
    Grado de V_{ab;K}, o None si no es generador.

    a < b: grado 0.  a = b (K = 0): la identidad P, grado 0.
    a > b: solo los puntos interiores (todos los k_j >= 1) son generadores,
    de grado n = dim S_v.
    """
    check_degree(W, a, b, K)
    if a <= b:
        return 0
    if all(kj >= 1 for kj in K.k):
        return W.n
    return None


def intersection_point(W: Weights, a: int, b: int, K: LatticeK, i: int = 0) -> tuple[Fraction, ...]:
    """
    Punto v_{ab;K} = sum_{l != i} (q_l k_l / |b-a|) v^{il}, es decir
    x^{il} = 2q0...qn * k_l / |b - a|.
    """
    if a == b:
        raise DegreeMismatchError("The identity P has no intersection point")
    check_degree(W, a, b, K)
    d = abs(b - a)
    t = [Fraction(qj * kj, d) for qj, kj in zip(W.q, K.k)]
    return point_from_barycentric(W, i, t)


def identity_generator(W: Weights, a: int, i: int = 0) -> MorphismGen:
    return MorphismGen(a=a, b=a, K=LatticeK(k=(0,) * (W.n + 1), d=0), v=None, degree=0, chart=i)


def hom_basis(W: Weights, a: int, b: int, i: int = 0) -> HomBasis:
    """
    Base de Mo(P)(L_a, L_b) en la carta i.

    Returns:
        HomBasis con los generadores en el orden canónico de K
    """
    if a == b:
        return HomBasis(a=a, b=b, gens=(identity_generator(W, a, i),))

    gens = []
    for K in weighted_compositions(W, abs(b - a)):
        degree = generator_degree(W, a, b, K)
        if degree is None:
            continue
        gens.append(MorphismGen(
            a=a, b=b, K=K, v=intersection_point(W, a, b, K, i), degree=degree, chart=i))
    logger.debug("Hom(L_%d, L_%d): %d generators", a, b, len(gens))
    return HomBasis(a=a, b=b, gens=tuple(gens))
