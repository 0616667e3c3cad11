from typing import Any, Optional

from pydantic import BaseModel, Field

from app.models import (
    CalibrationConfig,
    ModelKind,
    OptionQuote,
    VarianceMethod,
)


# ==================== Schemas de Varianza ====================
class VarianceRequest(BaseModel):
    """Schema para calcular la varianza del log-precio"""
    model: ModelKind
    params: dict[str, Any]
    times: list[float] = Field(min_length=1)
    method: VarianceMethod = VarianceMethod.ANALYTICAL
    initial_covariance: Optional[list[list[float]]] = None


class VarianceResponse(BaseModel):
    model: ModelKind
    method: VarianceMethod
    times: list[float]
    variances: list[float]


# ==================== Schemas de Precios ====================
class PriceRequest(BaseModel):
    """Schema para valorar una lista de opciones con un modelo"""
    model: ModelKind
    params: dict[str, Any]
    method: VarianceMethod = VarianceMethod.ANALYTICAL
    quotes: list[OptionQuote] = Field(min_length=1)


class QuotePrice(BaseModel):
    quote_id: str
    model_price: float


class PriceResponse(BaseModel):
    model: ModelKind
    method: VarianceMethod
    prices: list[QuotePrice]


class ImpliedVolRequest(BaseModel):
    """Schema para invertir la fórmula de Black"""
    quote: OptionQuote
    observed_price: Optional[float] = None  # None = precio de mercado de la cotización


class ImpliedVolResponse(BaseModel):
    quote_id: str
    implied_vol: float


# ==================== Schemas de Calibración ====================
class CalibrationRequest(BaseModel):
    """Schema para calibrar un modelo contra una cadena de opciones"""
    model: ModelKind = ModelKind.LMRGW
    quotes: list[OptionQuote] = Field(min_length=1)
    config: Optional[CalibrationConfig] = None
