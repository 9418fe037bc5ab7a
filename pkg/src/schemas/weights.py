import math
from functools import reduce

from pydantic import Field, computed_field, model_validator

from src.schemas.base import ExactModel, Rational, RationalPoint


class Weights(ExactModel):
    """Pesos Q = (q0,...,qn) de P(q0,...,qn) y sus constantes derivadas."""

    q: tuple[int, ...] = Field(
        default=..., description="Weights q_0..q_n, positive with gcd 1")

    @model_validator(mode="after")
    def check_weights(self):
        if len(self.q) < 2:
            raise ValueError("At least two weights are required")
        if any(qi < 1 for qi in self.q):
            raise ValueError(f"Weights must be positive: {self.q}")
        if reduce(math.gcd, self.q) != 1:
            raise ValueError(f"gcd must be 1, got {reduce(math.gcd, self.q)}")
        return self

    @computed_field
    @property
    def n(self) -> int:
        return len(self.q) - 1

    @computed_field
    @property
    def l(self) -> int:
        return math.lcm(*self.q)

    @computed_field
    @property
    def prodq(self) -> int:
        return math.prod(self.q)

    @computed_field
    @property
    def scale(self) -> int:
        """La constante 2*q0*...*qn."""
        return 2 * self.prodq

    @property
    def total(self) -> int:
        return sum(self.q)

    def others(self, i: int) -> tuple[int, ...]:
        """Índices l != i, en orden: son las coordenadas de la carta i."""
        return tuple(j for j in range(self.n + 1) if j != i)


class Chart(ExactModel):
    """Politopo P_{sigma_i} en las coordenadas x^{(i)} de la carta i."""

    index: int = Field(default=..., description="Chart index i")
    vertices: tuple[RationalPoint, ...] = Field(
        default=...,
        description="Origin followed by v^{ik} for k != i, in increasing k")
    vertex_labels: tuple[int, ...] = Field(
        default=...,
        description="Torus-fixed-point label of each vertex (i for the origin, k for v^{ik})")
    stacky_basis: tuple[RationalPoint, ...] = Field(
        default=..., description="Stacky vectors b_k spanning the cone sigma_i")

    @model_validator(mode="after")
    def check_shape(self):
        n = len(self.vertices) - 1
        if any(len(v) != n for v in self.vertices):
            raise ValueError("Every vertex needs n coordinates")
        if len(self.vertex_labels) != n + 1:
            raise ValueError("One label per vertex")
        return self


class ChartTransform(ExactModel):
    """Mapa afín x^{(target)} = linear * x^{(source)} + offset."""

    source: int
    target: int
    linear: tuple[tuple[Rational, ...], ...] = Field(
        default=..., description="n x n rational matrix, row-major")
    offset: tuple[Rational, ...] = Field(
        default=..., description="Rational n-vector")
