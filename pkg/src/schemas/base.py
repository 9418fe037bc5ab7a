from fractions import Fraction
from typing import Annotated, Any

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    PlainSerializer,
    model_serializer,
    model_validator,
)
from sympy import isprime


def parse_rational(valor: Any) -> Fraction:
    """
    Parser flexible de racionales que acepta múltiples formatos.
    Este validador se ejecuta ANTES de la validación de tipo de Pydantic.

    Formatos aceptados: Fraction, int, "p/q", "p" y pares [p, q].
    Los float se rechazan para no perder exactitud.
    """
    if isinstance(valor, bool):
        raise ValueError("Booleans are not rationals")

    if isinstance(valor, Fraction):
        return valor

    if isinstance(valor, int):
        return Fraction(valor)

    if isinstance(valor, str):
        try:
            return Fraction(valor.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"Invalid rational: '{valor}'") from exc

    if isinstance(valor, (list, tuple)) and len(valor) == 2:
        num, den = valor
        if isinstance(num, int) and isinstance(den, int) and den != 0:
            return Fraction(num, den)

    raise ValueError(f"Invalid type for a rational: {type(valor)}")


def _serialize_rational(valor: Fraction) -> list[int]:
    return [valor.numerator, valor.denominator]


# Racional exacto; se serializa como [num, den]
Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(_serialize_rational, return_type=list),
]

# Punto racional en coordenadas de una carta
RationalPoint = tuple[Rational, ...]


class ExactModel(BaseModel):
    """Base inmutable para todos los valores exactos."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


def _canonical_prime_map(raw: Any) -> tuple[tuple[int, Fraction], ...]:
    """
    Normaliza un mapa primo -> racional: acepta dict, pares o ternas
    [p, num, den], elimina entradas nulas y ordena por primo.
    """
    if raw is None:
        return ()
    if isinstance(raw, dict):
        items = list(raw.items())
    else:
        items = []
        for entry in raw:
            if len(entry) == 3:
                items.append((entry[0], Fraction(entry[1], entry[2])))
            else:
                items.append((entry[0], entry[1]))

    merged: dict[int, Fraction] = {}
    for prime, valor in items:
        merged[int(prime)] = merged.get(int(prime), Fraction(0)) + parse_rational(valor)
    return tuple(sorted((p, r) for p, r in merged.items() if r != 0))


class PrimeMap(ExactModel):
    """
    Mapa finito primo -> exponente racional, en forma canónica.
    El JSON es la lista ordenada de ternas [primo, num, den].
    """

    entries: tuple[tuple[int, Rational], ...] = ()

    @model_validator(mode="before")
    @classmethod
    def canonicalize(cls, data: Any) -> Any:
        if isinstance(data, dict) and set(data) == {"entries"}:
            data = data["entries"]
        return {"entries": _canonical_prime_map(data)}

    @model_validator(mode="after")
    def check_primes(self):
        for prime, valor in self.entries:
            if not isprime(prime):
                raise ValueError(f"Key {prime} is not prime")
            if valor == 0:
                raise ValueError(f"Zero exponent stored for {prime}")
        return self

    @model_serializer
    def to_triples(self) -> list[list[int]]:
        return [[p, r.numerator, r.denominator] for p, r in self.entries]

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.entries)

    def is_empty(self) -> bool:
        return not self.entries


class PosExact(PrimeMap):
    """Real positivo prod(p^r). El mapa vacío representa 1."""


class LogValue(PrimeMap):
    """Combinación sum(r * log p). El mapa vacío representa 0."""
