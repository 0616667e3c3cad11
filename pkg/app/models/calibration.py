from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from app.config import settings
from app.models.params import ModelKind, VarianceMethod


class QuoteSubset(str, Enum):
    TRAIN = "train"
    TEST = "test"
    DROPPED = "dropped"


class CalibrationConfig(BaseModel):
    """Configuración del optimizador (Nelder-Mead multi-arranque)"""
    model_config = ConfigDict(frozen=True)

    method: VarianceMethod = VarianceMethod.ANALYTICAL
    initial_guess: Optional[dict[str, float]] = None  # None = heurística por defecto
    max_iterations: int = Field(default_factory=lambda: settings.calibration_max_iterations, ge=1)
    loss_tolerance: float = Field(default_factory=lambda: settings.calibration_loss_tolerance, gt=0)
    restarts: int = Field(default_factory=lambda: settings.calibration_restarts, ge=1)
    rng_seed: int = Field(default_factory=lambda: settings.default_seed)
    train_fraction: float = Field(
        default_factory=lambda: settings.calibration_train_fraction, gt=0, le=1
    )


class QuoteFit(BaseModel):
    quote_id: str
    subset: QuoteSubset
    market_price: float
    fitted_price: float
    absolute_error: float
    relative_error: Optional[float] = None  # None si el precio de mercado es 0


class SurfacePoint(BaseModel):
    maturity_years: float
    moneyness: float
    model_implied_vol: float
    market_implied_vol: float


class FitReport(BaseModel):
    """Error fuera de muestra y puntos de la superficie de volatilidad"""
    rmse: Optional[float] = None
    rows: list[QuoteFit] = []
    surface: list[SurfacePoint] = []


class CalibrationResult(BaseModel):
    model: ModelKind
    method: VarianceMethod
    parameters: dict[str, float]
    final_loss: float = Field(ge=0)
    iterations: int
    function_evaluations: int
    converged: bool
    restarts: int
    rng_seed: int
    n_train: int
    n_test: int
    n_dropped: int = 0
    train_rmse: float
    test_rmse: Optional[float] = None
    per_quote_fit: list[QuoteFit]
