"""Fórmulas de Black con varianza del modelo y volatilidad implícita."""
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, special

from app.exceptions import NegativeVarianceError, NoSolutionError
from app.models import ModelParams, OptionQuote, PricingConfig, VarianceMethod
from app.services.lyapunov import analytical_output_variance, numerical_output_variance

IV_LOWER = 1e-8
IV_UPPER = 10.0
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def std_normal_cdf(x):
    """N(x) vía la función de error complementaria"""
    value = 0.5 * special.erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class ChainArrays:
    """Vista vectorial de una lista de cotizaciones; agrupa por vencimiento"""
    is_call: np.ndarray
    strike: np.ndarray
    maturity: np.ndarray
    underlying: np.ndarray
    market: np.ndarray
    unique_maturities: np.ndarray
    maturity_index: np.ndarray

    @classmethod
    def from_quotes(cls, quotes: Sequence[OptionQuote]) -> "ChainArrays":
        maturity = np.array([q.maturity for q in quotes], dtype=float)
        unique, inverse = np.unique(maturity, return_inverse=True)
        return cls(
            is_call=np.array([q.is_call for q in quotes], dtype=bool),
            strike=np.array([q.strike for q in quotes], dtype=float),
            maturity=maturity,
            underlying=np.array([q.underlying_price for q in quotes], dtype=float),
            market=np.array([q.market_price for q in quotes], dtype=float),
            unique_maturities=unique,
            maturity_index=inverse,
        )


def black_prices(is_call, underlying, strike, maturity, variance, cfg: Optional[PricingConfig] = None):
    """Precios de Black vectorizados; varianza total p(T) por opción"""
    cfg = cfg or PricingConfig()
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0):
        raise NegativeVarianceError(f"total variance must be non-negative, got {variance.min()}")

    S0 = np.asarray(underlying, dtype=float)
    K = np.asarray(strike, dtype=float)
    discount = np.exp(-cfg.risk_free_rate * np.asarray(maturity, dtype=float))

    degenerate = variance < cfg.variance_floor
    sd = np.sqrt(np.where(degenerate, 1.0, variance))
    d1 = (np.log(S0 / K) + 0.5 * variance) / sd
    d2 = d1 - sd

    call = S0 * std_normal_cdf(d1) - K * std_normal_cdf(d2)
    put = K * std_normal_cdf(-d2) - S0 * std_normal_cdf(-d1)
    intrinsic = np.where(is_call, np.maximum(S0 - K, 0.0), np.maximum(K - S0, 0.0))
    price = np.where(degenerate, intrinsic, np.where(is_call, call, put))
    return discount * np.maximum(price, 0.0)


def black_price(q: OptionQuote, total_variance: float, cfg: Optional[PricingConfig] = None) -> float:
    return float(
        black_prices(q.is_call, q.underlying_price, q.strike, q.maturity, total_variance, cfg)
    )


def black_vega(q: OptionQuote, sigma: float, cfg: Optional[PricingConfig] = None) -> float:
    """Derivada del precio respecto a sigma"""
    cfg = cfg or PricingConfig()
    sqrt_t = math.sqrt(q.maturity)
    d1 = (math.log(q.underlying_price / q.strike) + 0.5 * sigma * sigma * q.maturity) / (sigma * sqrt_t)
    discount = math.exp(-cfg.risk_free_rate * q.maturity)
    return discount * q.underlying_price * math.exp(-0.5 * d1 * d1) * _INV_SQRT_2PI * sqrt_t


def price_bounds(q: OptionQuote, cfg: Optional[PricingConfig] = None) -> tuple[float, float]:
    """Cotas de no arbitraje (valor intrínseco descontado, cota superior)"""
    cfg = cfg or PricingConfig()
    discount = math.exp(-cfg.risk_free_rate * q.maturity)
    if q.is_call:
        return discount * max(q.underlying_price - q.strike, 0.0), discount * q.underlying_price
    return discount * max(q.strike - q.underlying_price, 0.0), discount * q.strike


def within_no_arbitrage_bounds(q: OptionQuote, price: float, cfg: Optional[PricingConfig] = None) -> bool:
    lower, upper = price_bounds(q, cfg)
    tolerance = 1e-12 * max(1.0, upper)
    return lower - tolerance <= price <= upper + tolerance


# ==================== Precio con varianza del modelo ====================
def model_variance(model: ModelParams, maturities, method: VarianceMethod, P0=None) -> np.ndarray:
    """Varianza del log-precio en cada vencimiento por el método elegido"""
    if VarianceMethod(method) is VarianceMethod.ANALYTICAL:
        return analytical_output_variance(model, maturities, P0)
    return numerical_output_variance(model, maturities, P0)


def price_with_model(
    q: OptionQuote,
    model: ModelParams,
    method: VarianceMethod = VarianceMethod.ANALYTICAL,
    cfg: Optional[PricingConfig] = None,
    P0=None,
) -> float:
    variance = model_variance(model, [q.maturity], method, P0)[0]
    return black_price(q, variance, cfg)


def price_arrays(
    arrays: ChainArrays,
    model: ModelParams,
    method: VarianceMethod = VarianceMethod.ANALYTICAL,
    cfg: Optional[PricingConfig] = None,
    P0=None,
) -> np.ndarray:
    """Precios de una cadena: una evaluación de varianza por vencimiento distinto"""
    variance = model_variance(model, arrays.unique_maturities, method, P0)[arrays.maturity_index]
    return black_prices(
        arrays.is_call, arrays.underlying, arrays.strike, arrays.maturity, variance, cfg
    )


def price_chain(
    quotes: Sequence[OptionQuote],
    model: ModelParams,
    method: VarianceMethod = VarianceMethod.ANALYTICAL,
    cfg: Optional[PricingConfig] = None,
    P0=None,
) -> np.ndarray:
    if not quotes:
        return np.array([], dtype=float)
    return price_arrays(ChainArrays.from_quotes(quotes), model, method, cfg, P0)


def model_implied_vols(model: ModelParams, maturities, method: VarianceMethod, P0=None) -> np.ndarray:
    """Volatilidad GBM equivalente sqrt(p(T) / T)"""
    maturities = np.asarray(maturities, dtype=float)
    return np.sqrt(model_variance(model, maturities, method, P0) / maturities)


# ==================== Volatilidad implícita ====================
def implied_vol(q: OptionQuote, observed_price: float, cfg: Optional[PricingConfig] = None) -> float:
    """Sigma de Black que reproduce el precio observado.

    Brent sobre el intervalo [1e-8, 10] y luego unos pasos de Newton con la vega.
    """
    cfg = cfg or PricingConfig()
    lower, upper = price_bounds(q, cfg)
    if not within_no_arbitrage_bounds(q, observed_price, cfg):
        raise NoSolutionError(
            f"price {observed_price} for {q.id} outside no-arbitrage bounds [{lower}, {upper}]"
        )

    def residual(sigma: float) -> float:
        return black_price(q, sigma * sigma * q.maturity, cfg) - observed_price

    if residual(IV_LOWER) >= 0:
        return IV_LOWER
    if residual(IV_UPPER) < 0:
        raise NoSolutionError(f"price {observed_price} for {q.id} needs sigma above {IV_UPPER}")

    sigma = optimize.brentq(residual, IV_LOWER, IV_UPPER, xtol=1e-15, maxiter=200)
    for _ in range(3):
        diff = residual(sigma)
        if abs(diff) <= 1e-13:
            break
        vega = black_vega(q, sigma, cfg)
        if vega < 1e-12:
            break
        candidate = sigma - diff / vega
        if not IV_LOWER <= candidate <= IV_UPPER:
            break
        sigma = candidate
    return sigma
