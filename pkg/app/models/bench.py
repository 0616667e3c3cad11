from enum import Enum
from typing import Optional

from pydantic import BaseModel


class BenchKind(str, Enum):
    VARIANCE = "variance"
    CALIBRATION = "calibration"


class BenchRow(BaseModel):
    label: str
    evaluations: int
    analytical_s: float
    numerical_s: float
    speedup: float
    reliable: bool = True
    max_relative_discrepancy: Optional[float] = None
    error: Optional[str] = None


class BenchReport(BaseModel):
    """Tiempos (mediana) analítico vs numérico, con speedup = numérico / analítico"""
    title: str
    kind: BenchKind = BenchKind.VARIANCE
    rows: list[BenchRow]
    repetitions: int
    aggregation: str = "median"
    batched: bool = False
