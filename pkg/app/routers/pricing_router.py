from fastapi import APIRouter, HTTPException

from app.exceptions import AppError
from app.schemas import (
    ImpliedVolRequest,
    ImpliedVolResponse,
    PriceRequest,
    PriceResponse,
    QuotePrice,
)
from app.services.model_catalog import build_params
from app.services.pricing import implied_vol, price_chain

router = APIRouter(prefix="/pricing", tags=["Precios"])


@router.post("/price", response_model=PriceResponse)
def price_quotes(request: PriceRequest):
    """Precio de Black de cada opción con la varianza del modelo"""
    try:
        params = build_params(request.model, request.params)
        prices = price_chain(request.quotes, params, request.method)
    except AppError as exc:
        raise HTTPException(status_code=exc.http_status, detail=exc.message)

    return PriceResponse(
        model=request.model,
        method=request.method,
        prices=[
            QuotePrice(quote_id=q.id, model_price=float(p))
            for q, p in zip(request.quotes, prices)
        ],
    )


@router.post("/implied-vol", response_model=ImpliedVolResponse)
def quote_implied_vol(request: ImpliedVolRequest):
    """Volatilidad implícita de Black de un precio observado"""
    quote = request.quote
    observed = quote.market_price if request.observed_price is None else request.observed_price
    try:
        sigma = implied_vol(quote, observed)
    except AppError as exc:
        raise HTTPException(status_code=exc.http_status, detail=exc.message)
    return ImpliedVolResponse(quote_id=quote.id, implied_vol=sigma)
