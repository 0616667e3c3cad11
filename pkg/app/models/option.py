from datetime import date
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings


class OptionKind(str, Enum):
    CALL = "call"
    PUT = "put"


class OptionQuote(BaseModel):
    """Opción europea listada sobre un futuro (r = 0 para las cotas)"""
    model_config = ConfigDict(
        frozen=True,
        allow_inf_nan=False,
        json_schema_extra={
            "example": {
                "id": "TTF-0001",
                "kind": "call",
                "strike": 50.0,
                "maturity": 0.25,
                "underlying_price": 48.5,
                "market_price": 3.12,
            }
        },
    )

    id: str = Field(min_length=1)
    kind: OptionKind
    strike: float = Field(gt=0)
    maturity: float = Field(gt=0, description="Años hasta el vencimiento")
    underlying_price: float = Field(gt=0)
    market_price: float = Field(ge=0)

    @model_validator(mode="after")
    def _upper_bound(self):
        bound = self.underlying_price if self.kind is OptionKind.CALL else self.strike
        if self.market_price > bound:
            raise ValueError(
                f"{self.kind.value} price {self.market_price} exceeds no-arbitrage bound {bound}"
            )
        return self

    @property
    def moneyness(self) -> float:
        return self.strike / self.underlying_price

    @property
    def is_call(self) -> bool:
        return self.kind is OptionKind.CALL


class OptionChainFile(BaseModel):
    """Cadena de opciones de un día de negociación"""
    model_config = ConfigDict(frozen=True)

    market_label: str
    trade_date: Optional[date] = None
    quotes: tuple[OptionQuote, ...]
    diagnostics: tuple[str, ...] = ()

    @model_validator(mode="after")
    def _unique_ids(self):
        ids = [q.id for q in self.quotes]
        if len(ids) != len(set(ids)):
            raise ValueError("quote ids must be unique within a chain")
        return self


class PricingConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    risk_free_rate: float = Field(default_factory=lambda: settings.risk_free_rate)
    variance_floor: float = Field(default_factory=lambda: settings.variance_floor, gt=0)
