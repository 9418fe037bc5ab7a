from typing import Any, Optional

from pydantic import BaseModel, Field, computed_field


class CheckResult(BaseModel):
    """Resultado de una comprobación individual."""

    suite: str
    item: str = Field(default=..., description="Pair, triple or point being checked")
    expected: Any = None
    got: Any = None
    passed: bool


class SuiteReport(BaseModel):
    """Resultado agregado de una suite de verificación."""

    suite: str
    checked: int = 0
    failures: list[CheckResult] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, result: CheckResult) -> None:
        self.checked += 1
        if not result.passed:
            self.failures.append(result)


class ScanReport(BaseModel):
    """Barrido de |c psi| sobre una rejilla racional de P."""

    a: int
    b: int
    K: tuple[int, ...]
    grid: int
    points: int = 0
    identity: bool = Field(default=False, description="a = b: |e| is identically 1")
    max_value: float = 1.0
    argmax: Optional[list[float]] = None
    v: Optional[list[float]] = None
    bounded: bool = True
    unique: bool = True
    exact_at_v: bool = True

    @computed_field
    @property
    def passed(self) -> bool:
        return self.bounded and self.unique and self.exact_at_v


class Trajectory(BaseModel):
    """Trayectoria del campo gradiente lineal x' = lambda (x - v)."""

    times: list[float]
    samples: list[list[float]]
    lam: float = Field(default=..., description="Linear rate 2pi (b-a) / 2q0...qn")
    fixed_point: list[float]
    x0: list[float]


class TreeEdge(BaseModel):
    start: list[float]
    end: list[float]
    trajectory: Optional[Trajectory] = None
    straightness: float = 0.0
    residual: float = 0.0
    area_numeric: float = 0.0


class GradientTree(BaseModel):
    """Árbol gradiente trivalente de m2(V_ab, V_bc)."""

    a: int
    b: int
    c: int
    K_ab: tuple[int, ...]
    K_bc: tuple[int, ...]
    v_ab: list[float]
    v_bc: list[float]
    v_ac: list[float]
    edges: list[TreeEdge]
    root_field_norm: float
    meeting_residual: float
    area_numeric: float
    area_exact: float
    degenerate: bool = False

    @computed_field
    @property
    def area_error(self) -> float:
        return abs(self.area_numeric - self.area_exact)
