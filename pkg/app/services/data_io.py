"""Lectura y escritura de cadenas de opciones y superficies de volatilidad.

Contrato CSV: UTF-8, separador coma, punto decimal y fin de línea LF.
Los flotantes se escriben con `repr`, la representación decimal más corta
que se relee al mismo valor.
"""
import logging
import re
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.config import settings
from app.exceptions import DataIOError, EmptyChainError, FormatError, InvalidInputError
from app.models import (
    ModelParams,
    OptionChainFile,
    OptionKind,
    OptionQuote,
    PricingConfig,
    SurfacePoint,
    VarianceMethod,
)
from app.services.pricing import price_bounds, price_chain

logger = logging.getLogger(__name__)

CHAIN_COLUMNS = (
    "quote_id",
    "option_type",
    "strike",
    "maturity_years",
    "underlying_price",
    "market_price",
)
SURFACE_COLUMNS = (
    "maturity_years",
    "moneyness",
    "model_implied_vol",
    "market_implied_vol",
)
MAX_FIELDS = 32
# marca las líneas con más de MAX_FIELDS campos para que fallen la comprobación de ancho
_OVERFLOW_FIELD = "<overflow>"
DAYS_PER_YEAR = 365.0
DEFAULT_MONEYNESS = tuple(float(m) for m in np.linspace(0.8, 1.2, 9))

# <etiqueta>_<AAAA-MM-DD>.csv
_STEM_PATTERN = re.compile(r"^(?P<label>.+)_(?P<date>\d{4}-\d{2}-\d{2})$")


# ==================== Fechas ====================
def year_fraction(trade_date: date, delivery_date: date) -> float:
    """Fracción de año ACT/365 entre la fecha de negociación y la de entrega"""
    days = (delivery_date - trade_date).days
    if days <= 0:
        raise InvalidInputError(
            f"delivery date {delivery_date} must be after trade date {trade_date}"
        )
    return days / DAYS_PER_YEAR


def monthly_maturities(trade_date: Optional[date], count: int) -> list[float]:
    """Vencimientos de futuros mensuales consecutivos (ACT/365 si hay fecha)"""
    if count < 1:
        raise InvalidInputError(f"count must be at least 1, got {count}")
    if trade_date is None:
        return [m / 12.0 for m in range(1, count + 1)]
    start = pd.Timestamp(trade_date)
    return [
        year_fraction(trade_date, (start + pd.DateOffset(months=m)).date())
        for m in range(1, count + 1)
    ]


def _label_and_date(path: Path) -> tuple[str, Optional[date]]:
    match = _STEM_PATTERN.match(path.stem)
    if match is None:
        return path.stem, None
    try:
        return match.group("label"), date.fromisoformat(match.group("date"))
    except ValueError:
        return path.stem, None


# ==================== Cadenas de opciones ====================
def _mark_overflow(bad_line: list[str]) -> list[str]:
    return [*bad_line[: len(CHAIN_COLUMNS)], _OVERFLOW_FIELD]


def _validation_message(exc: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or 'quote'}: {err['msg']}" for err in exc.errors()
    )


def parse_chain(
    path: str | Path,
    market_label: Optional[str] = None,
    trade_date: Optional[date] = None,
) -> OptionChainFile:
    """Leer una cadena CSV; las filas inválidas se omiten con diagnóstico numerado.

    La etiqueta de mercado y la fecha se toman del nombre `<etiqueta>_<AAAA-MM-DD>.csv`
    cuando no se pasan explícitamente.
    """
    path = Path(path)
    if not path.is_file():
        raise InvalidInputError(f"chain file not found: {path}")

    try:
        header = pd.read_csv(path, nrows=0, encoding="utf-8")
        body = pd.read_csv(
            path,
            header=None,
            skiprows=1,
            names=list(range(MAX_FIELDS)),
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
            engine="python",
            on_bad_lines=_mark_overflow,
        )
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not valid UTF-8") from exc
    except pd.errors.EmptyDataError as exc:
        raise FormatError(f"{path}: missing header {','.join(CHAIN_COLUMNS)}") from exc
    except pd.errors.ParserError as exc:
        raise FormatError(f"{path}: {exc}") from exc

    if tuple(header.columns) != CHAIN_COLUMNS:
        raise FormatError(
            f"{path}: expected header {','.join(CHAIN_COLUMNS)}, "
            f"got {','.join(map(str, header.columns))}"
        )

    body = body.fillna("")
    width = len(CHAIN_COLUMNS)
    quotes: list[OptionQuote] = []
    seen: set[str] = set()
    diagnostics: list[str] = []

    for index, values in enumerate(body.itertuples(index=False, name=None)):
        row = index + 1
        line = index + 2
        if all(v == "" for v in values):
            continue
        if any(v != "" for v in values[width:]):
            diagnostics.append(f"row {row} (line {line}): expected {width} fields")
            continue
        record = dict(zip(("id", "kind", "strike", "maturity", "underlying_price", "market_price"),
                          values[:width]))
        try:
            quote = OptionQuote.model_validate(record)
        except ValidationError as exc:
            diagnostics.append(f"row {row} (line {line}): {_validation_message(exc)}")
            continue
        if quote.id in seen:
            diagnostics.append(f"row {row} (line {line}): duplicate quote_id {quote.id}")
            continue
        seen.add(quote.id)
        quotes.append(quote)

    for message in diagnostics:
        logger.warning("%s: %s", path.name, message)
    if not quotes:
        raise EmptyChainError(f"{path}: no valid quotes", diagnostics)

    label, stem_date = _label_and_date(path)
    return OptionChainFile(
        market_label=market_label or label,
        trade_date=trade_date or stem_date,
        quotes=tuple(quotes),
        diagnostics=tuple(diagnostics),
    )


def _float_text(values) -> list[str]:
    return [repr(float(v)) for v in values]


def chain_frame(chain: OptionChainFile, model_prices=None) -> pd.DataFrame:
    """DataFrame de texto con el formato del contrato CSV"""
    quotes = chain.quotes
    frame = pd.DataFrame(
        {
            "quote_id": [q.id for q in quotes],
            "option_type": [q.kind.value for q in quotes],
            "strike": _float_text(q.strike for q in quotes),
            "maturity_years": _float_text(q.maturity for q in quotes),
            "underlying_price": _float_text(q.underlying_price for q in quotes),
            "market_price": _float_text(q.market_price for q in quotes),
        }
    )
    if model_prices is not None:
        if len(model_prices) != len(quotes):
            raise InvalidInputError("model_prices must have one value per quote")
        frame["model_price"] = _float_text(model_prices)
    return frame


def _write_frame(frame: pd.DataFrame, path: Path) -> None:
    try:
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def write_chain(chain: OptionChainFile, path: str | Path, model_prices=None) -> None:
    """Escribir la cadena; con `model_prices` se añade la columna model_price"""
    _write_frame(chain_frame(chain, model_prices), Path(path))


# ==================== Cadenas sintéticas ====================
def generate_synthetic_chain(
    model: ModelParams,
    n_quotes: int = 500,
    maturities: Optional[Sequence[float]] = None,
    moneyness: Optional[Sequence[float]] = None,
    noise_sd: float = 0.0,
    rng_seed: int = 0,
    underlying_price: Optional[float] = None,
    market_label: str = "SYN",
    trade_date: Optional[date] = None,
    method: VarianceMethod = VarianceMethod.ANALYTICAL,
    pricing: Optional[PricingConfig] = None,
) -> OptionChainFile:
    """Cadena sintética con precios del modelo más ruido gaussiano.

    La cotización i usa el vencimiento i mod n_m y el moneyness (i div n_m) mod n_g;
    por encima del forward se cotiza la call y por debajo la put. El ruido se trunca
    a las cotas de no arbitraje.
    """
    if n_quotes < 1:
        raise InvalidInputError(f"n_quotes must be at least 1, got {n_quotes}")
    if noise_sd < 0:
        raise InvalidInputError(f"noise_sd must be non-negative, got {noise_sd}")
    maturities = list(maturities) if maturities is not None else monthly_maturities(trade_date, 12)
    grid = list(moneyness) if moneyness is not None else list(DEFAULT_MONEYNESS)
    if not maturities or min(maturities) <= 0:
        raise InvalidInputError("maturities must be a nonempty list of positive year fractions")
    if not grid or min(grid) <= 0:
        raise InvalidInputError("moneyness grid must be nonempty and positive")
    s0 = settings.synthetic_underlying_price if underlying_price is None else underlying_price
    pricing = pricing or PricingConfig()

    n_m, n_g = len(maturities), len(grid)
    skeleton = []
    for i in range(n_quotes):
        m = grid[(i // n_m) % n_g]
        skeleton.append(
            OptionQuote(
                id=f"{market_label}-{i:04d}",
                kind=OptionKind.CALL if m >= 1.0 else OptionKind.PUT,
                strike=m * s0,
                maturity=maturities[i % n_m],
                underlying_price=s0,
                market_price=0.0,
            )
        )

    prices = price_chain(skeleton, model, method, pricing)
    noise = np.random.default_rng(rng_seed).normal(0.0, noise_sd, size=n_quotes)
    quotes = []
    for q, price, eps in zip(skeleton, prices, noise):
        lower, upper = price_bounds(q, pricing)
        quotes.append(q.model_copy(update={"market_price": float(np.clip(price + eps, lower, upper))}))

    logger.info("Cadena sintética %s: %d cotizaciones, %d vencimientos", market_label, n_quotes, n_m)
    return OptionChainFile(market_label=market_label, trade_date=trade_date, quotes=tuple(quotes))


# ==================== Superficie de volatilidad ====================
def export_surface(points: Sequence[SurfacePoint], path: str | Path) -> None:
    """CSV maturity_years,moneyness,model_implied_vol,market_implied_vol"""
    if not points:
        raise InvalidInputError("surface export needs at least one point")
    frame = pd.DataFrame(
        {column: _float_text(getattr(p, column) for p in points) for column in SURFACE_COLUMNS}
    )
    _write_frame(frame, Path(path))


def load_surface(path: str | Path) -> list[SurfacePoint]:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, encoding="utf-8")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise FormatError(f"cannot read surface {path}: {exc}") from exc
    if tuple(frame.columns) != SURFACE_COLUMNS:
        raise FormatError(f"{path}: expected header {','.join(SURFACE_COLUMNS)}")
    return [SurfacePoint.model_validate(record) for record in frame.to_dict(orient="records")]
