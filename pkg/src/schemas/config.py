import os
from enum import Enum
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

from src.utils.errors import WPSError
from src.utils.lattice import build_weights


class OutputFormat(str, Enum):
    JSON = "json"
    TEXT = "text"
    CSV = "csv"
    SVG = "svg"
    PNG = "png"


SUITES = ("dims", "exceptional", "assoc", "functor", "ratio", "charts", "flow",
          "lifts", "potentials", "trees", "all")


def default_threads() -> int:
    """
    Número de hilos: WPSHMS_THREADS (también desde .env) o min(8, cpu_count).
    """
    load_dotenv()
    value = os.getenv("WPSHMS_THREADS")
    if value:
        try:
            threads = int(value)
        except ValueError:
            raise WPSError(f"WPSHMS_THREADS must be an integer, got {value!r}") from None
        if threads < 1:
            raise WPSError(f"WPSHMS_THREADS must be positive, got {threads}")
        return threads
    return min(8, os.cpu_count() or 1)


def default_log_level() -> str:
    load_dotenv()
    return os.getenv("WPSHMS_LOG_LEVEL", "WARNING").upper()


class RunConfig(BaseModel):
    """Configuración de una ejecución de la CLI."""

    weights: tuple[int, ...] = Field(default=..., description="Weights q0..qn, gcd 1")
    base: int = Field(default=0, description="First object q of the collection")
    chart: int = Field(default=0, ge=0, description="Chart index i")
    out: Optional[str] = Field(default=None, description="Output path; stdout when missing")
    format: OutputFormat = OutputFormat.JSON
    suite: str = "all"
    grid: Optional[int] = Field(default=None, ge=1, description="Scan resolution m per axis")
    seed: int = 0
    threads: int = Field(default_factory=default_threads, ge=1)
    dist: Optional[int] = Field(default=None, ge=0, description="Hom distance |b-a| for generator plots")
    sections: Optional[tuple[int, int]] = Field(default=None, description="Range a0..a1 of section plots")
    trees: bool = Field(default=False, description="Draw gradient trees in polytope plots")

    @field_validator("weights")
    @classmethod
    def check_weights(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        build_weights(value)
        return value

    @field_validator("suite")
    @classmethod
    def check_suite(cls, value: str) -> str:
        if value not in SUITES:
            raise ValueError(f"Unknown suite {value!r}; choose one of {', '.join(SUITES)}")
        return value
