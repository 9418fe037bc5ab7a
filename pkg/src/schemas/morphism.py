from typing import Optional

from pydantic import Field, computed_field, model_validator

from src.schemas.base import ExactModel, LogValue, PosExact, Rational, RationalPoint
from src.schemas.weights import Weights


class LatticeK(ExactModel):
    """Vector K = (k_0,...,k_n) >= 0 con grado d = sum(q_j k_j)."""

    k: tuple[int, ...] = Field(default=..., description="Nonnegative exponents k_0..k_n")
    d: int = Field(default=..., description="Weighted degree sum(q_j k_j)")

    @model_validator(mode="after")
    def check_nonnegative(self):
        if any(kj < 0 for kj in self.k):
            raise ValueError(f"K must be nonnegative: {self.k}")
        return self


class GenKey(ExactModel):
    """Referencia compacta a un generador V_{ab;K}."""

    a: int
    b: int
    k: tuple[int, ...]


class MorphismGen(ExactModel):
    """Generador V_{ab;K} de Mo(P)(L_a, L_b)."""

    a: int = Field(default=..., description="Source object label")
    b: int = Field(default=..., description="Target object label")
    K: LatticeK
    v: Optional[RationalPoint] = Field(
        default=None, description="Intersection point v_{ab;K}; None for the identity P")
    degree: int = Field(default=0, description="Morse degree of the generator")
    chart: int = Field(default=0, description="Chart the point is expressed in")

    @computed_field
    @property
    def is_identity(self) -> bool:
        return self.a == self.b

    @property
    def key(self) -> GenKey:
        return GenKey(a=self.a, b=self.b, k=self.K.k)


class HomBasis(ExactModel):
    """Base de Mo(P)(L_a, L_b)."""

    a: int
    b: int
    gens: tuple[MorphismGen, ...] = ()

    @computed_field
    @property
    def dim(self) -> int:
        return len(self.gens)


class LagrangianLift(ExactModel):
    """Levantamiento s_{a;K_a} de la sección lagrangiana espejo de O(a)."""

    a: int = Field(default=..., description="Mirror line bundle degree")
    Ka: tuple[int, ...] = Field(default=..., description="Integer vector with sum(q_j Ka_j) = a")


class Potential(ExactModel):
    """
    Función log-afín en unidades de f/2pi sobre la carta `chart`:

        coeff_boundary * log(scale - sum q_l x_l) + sum coeff_l * log(q_l x_l) + const
    """

    weights: Weights
    chart: int
    coeff_boundary: Rational
    coeff: tuple[Rational, ...] = Field(
        default=..., description="Coefficient of log(q_l x^{il}) for each l != chart")
    const: LogValue = Field(default_factory=LogValue)


class MirrorGen(ExactModel):
    """Generador espejo psi_{ab;K} con su constante de reescalado."""

    a: int
    b: int
    K: LatticeK
    c: PosExact = Field(default=..., description="Rescaling constant 1/|psi(v_{ab;K})|")
    chart: int = 0
    phase_K: tuple[int, ...] = Field(
        default=..., description="Label of the phase exp(i K.y), kept symbolic")
