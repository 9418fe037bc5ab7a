"""
Aritmética exacta para reales positivos de la forma prod(p_i^{r_i}) con p_i
primo y r_i racional, y para sus logaritmos sum(r_i log p_i).

Por factorización única, dos valores son iguales si y solo si sus mapas de
exponentes coinciden, así que la igualdad es exacta (tolerancia cero).
El orden solo se ofrece en coma flotante (approx_le).
"""
import json
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import numpy as np
from sympy import factorint

from src.schemas.base import LogValue, PosExact, parse_rational
from src.utils.errors import ExactDomainError

logger = logging.getLogger(__name__)

SIEVE_LIMIT = 10**6
# exp() desborda a partir de aquí
_MAX_LOG = math.log(np.finfo(np.float64).max)


@lru_cache(maxsize=1)
def prime_table(limit: int = SIEVE_LIMIT) -> tuple[int, ...]:
    """
    Criba de Eratóstenes hasta `limit`, calculada una sola vez.

    Returns:
        Tupla ordenada de primos <= limit
    """
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


def _factor_int(n: int) -> dict[int, int]:
    """Factoriza un entero positivo por división de prueba con la criba."""
    factors: dict[int, int] = {}
    for p in prime_table():
        if p * p > n:
            break
        count = 0
        while n % p == 0:
            n //= p
            count += 1
        if count:
            factors[p] = count
    if n > 1:
        if n <= SIEVE_LIMIT**2:
            factors[n] = factors.get(n, 0) + 1
        else:
            # Resto fuera del alcance de la criba
            for p, count in factorint(n).items():
                factors[int(p)] = factors.get(int(p), 0) + int(count)
    return factors


def pos_exact(mapping: dict[int, Union[Fraction, int, str]] | None = None) -> PosExact:
    """Construye un PosExact canónico a partir de un dict primo -> exponente."""
    return PosExact.model_validate(mapping or {})


def log_value(mapping: dict[int, Union[Fraction, int, str]] | None = None) -> LogValue:
    """Construye un LogValue canónico a partir de un dict primo -> coeficiente."""
    return LogValue.model_validate(mapping or {})


def factor_positive(x: Union[Fraction, int, str]) -> PosExact:
    """
    Factoriza un racional positivo.

    Args:
        x: Racional positivo

    Returns:
        PosExact con exponentes enteros tal que prod(p^e) = x
    """
    x = parse_rational(x)
    if x <= 0:
        raise ExactDomainError(f"Cannot factor non-positive value {x}")

    exponents: dict[int, Fraction] = {}
    for p, e in _factor_int(x.numerator).items():
        exponents[p] = exponents.get(p, Fraction(0)) + e
    for p, e in _factor_int(x.denominator).items():
        exponents[p] = exponents.get(p, Fraction(0)) - e
    return pos_exact(exponents)


def pe_mul_pow(terms: Iterable[tuple[PosExact, Union[Fraction, int]]]) -> PosExact:
    """
    Producto de potencias racionales: prod(x_k ^ r_k).

    Args:
        terms: Pares (valor, exponente racional)

    Returns:
        PosExact canónico (sin entradas nulas)
    """
    exponents: dict[int, Fraction] = {}
    for value, power in terms:
        power = parse_rational(power)
        for p, r in value.entries:
            exponents[p] = exponents.get(p, Fraction(0)) + r * power
    return pos_exact(exponents)


def pe_eq(a: PosExact, b: PosExact) -> bool:
    """Igualdad real exacta: los mapas canónicos coinciden."""
    return a.entries == b.entries


def pe_inv(a: PosExact) -> PosExact:
    return pe_mul_pow([(a, -1)])


def log_of(a: PosExact) -> LogValue:
    """log de un PosExact; los exponentes pasan a ser coeficientes."""
    return LogValue.model_validate(a.as_dict())


def exp_of(value: LogValue) -> PosExact:
    """exp de un LogValue."""
    return PosExact.model_validate(value.as_dict())


def lv_add(*values: LogValue) -> LogValue:
    terms: dict[int, Fraction] = {}
    for value in values:
        for p, r in value.entries:
            terms[p] = terms.get(p, Fraction(0)) + r
    return log_value(terms)


def lv_scale(value: LogValue, factor: Union[Fraction, int]) -> LogValue:
    factor = parse_rational(factor)
    return log_value({p: r * factor for p, r in value.entries})


def lv_neg(value: LogValue) -> LogValue:
    return lv_scale(value, -1)


def lv_log_of_rational(x: Union[Fraction, int], coefficient: Union[Fraction, int] = 1) -> LogValue:
    """coefficient * log(x) para x racional positivo."""
    return lv_scale(log_of(factor_positive(x)), coefficient)


def _log_sum(value: Union[PosExact, LogValue]) -> float:
    # fsum evita la cancelación al sumar términos de signo opuesto
    return math.fsum(float(r) * math.log(p) for p, r in value.entries)


def to_float(value: Union[PosExact, LogValue]) -> float:
    """
    Evalúa en binary64.

    Para PosExact devuelve exp(sum r log p); para LogValue, la suma.
    Si exp() desborda se satura a +inf y se registra un aviso.
    """
    total = _log_sum(value)
    if isinstance(value, LogValue):
        return total
    if total > _MAX_LOG:
        logger.warning("Exact value overflows binary64 (log = %.6g), saturating", total)
        return math.inf
    return math.exp(total)


def approx_le(a: PosExact, b: PosExact, margin: float = 1e-10) -> bool:
    """
    Orden aproximado a <= b con margen relativo en escala logarítmica.
    El orden exacto no está disponible.
    """
    return _log_sum(a) <= _log_sum(b) + margin


def pos_exact_to_json(value: PosExact) -> str:
    return json.dumps(value.model_dump())


def pos_exact_from_json(text: str) -> PosExact:
    return PosExact.model_validate(json.loads(text))
