from typing import Optional

from pydantic import Field, computed_field

from src.schemas.base import ExactModel, PosExact
from src.schemas.morphism import GenKey, HomBasis, LagrangianLift, MorphismGen
from src.schemas.weights import Weights


class ProductEntry(ExactModel):
    """m2(src1, src2) = weight * dst."""

    src1: GenKey
    src2: GenKey
    dst: GenKey
    weight: PosExact
    approx: float = Field(default=..., description="Float value of the weight, for reading only")


class CategoryData(ExactModel):
    """Objetos, bases de morfismos y tabla completa de m2 de Mo_E(P)."""

    weights: Weights
    base: int = Field(default=0, description="Base q of the collection L_q..L_{q+R}")
    chart: int = 0
    objects: tuple[LagrangianLift, ...]
    homs: tuple[HomBasis, ...]
    products: tuple[ProductEntry, ...]

    @computed_field
    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(obj.a for obj in self.objects)

    def hom(self, a: int, b: int) -> Optional[HomBasis]:
        for basis in self.homs:
            if basis.a == a and basis.b == b:
                return basis
        return None

    def generator(self, key: GenKey) -> Optional[MorphismGen]:
        basis = self.hom(key.a, key.b)
        if basis is None:
            return None
        for gen in basis.gens:
            if gen.K.k == key.k:
                return gen
        return None

    def product_table(self) -> dict[tuple[GenKey, GenKey], ProductEntry]:
        return {(p.src1, p.src2): p for p in self.products}
