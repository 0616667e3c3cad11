import math

import numpy as np
import pytest

from app.exceptions import NegativeVarianceError, NoSolutionError
from app.models import GbmParams, LmrGwParams, PricingConfig, VarianceMethod
from app.services.data_io import generate_synthetic_chain
from app.services.pricing import (
    IV_LOWER,
    black_price,
    implied_vol,
    model_implied_vols,
    price_bounds,
    price_chain,
    price_with_model,
    std_normal_cdf,
    within_no_arbitrage_bounds,
)
from tests.conftest import make_quote

ZERO_RATE = PricingConfig(risk_free_rate=0.0)


# ==================== Pruebas de la Normal ====================

def test_std_normal_cdf_symmetry():
    """N(x) + N(-x) = 1"""
    assert std_normal_cdf(0.0) == 0.5
    for x in (0.1, 1.0, 3.0):
        assert std_normal_cdf(x) + std_normal_cdf(-x) == pytest.approx(1.0, abs=1e-15)


def test_std_normal_cdf_value():
    """N(1) tabulado"""
    assert std_normal_cdf(1.0) == pytest.approx(0.841344746068543, abs=1e-12)


def test_std_normal_cdf_vectorized():
    """Entrada vectorial"""
    values = std_normal_cdf(np.array([-1.0, 0.0, 1.0]))
    assert values.shape == (3,)
    assert values[1] == 0.5


# ==================== Pruebas de la Fórmula de Black ====================

def test_zero_variance_is_intrinsic():
    """Varianza nula: valor intrínseco"""
    q = make_quote("call", strike=80.0, underlying_price=100.0)
    assert black_price(q, 0.0, ZERO_RATE) == 20.0
    assert black_price(make_quote("put", strike=80.0, underlying_price=100.0), 0.0, ZERO_RATE) == 0.0


def test_atm_call_value():
    """S0 = K = 100, p_T = 0.04: 100 (2 N(0.1) - 1)"""
    q = make_quote("call", strike=100.0, maturity=1.0, underlying_price=100.0)
    assert black_price(q, 0.04, ZERO_RATE) == pytest.approx(7.9656, abs=1e-3)
    assert black_price(q, 0.04, ZERO_RATE) == pytest.approx(100 * (2 * std_normal_cdf(0.1) - 1), rel=1e-13)


@pytest.mark.parametrize("rate", [0.0, 0.05])
@pytest.mark.parametrize("strike", [40.0, 50.0, 65.0])
@pytest.mark.parametrize("variance", [1e-6, 0.04, 1.5])
def test_put_call_parity(rate, strike, variance):
    """Paridad put-call sobre futuros"""
    cfg = PricingConfig(risk_free_rate=rate)
    call = black_price(make_quote("call", strike=strike, maturity=0.75), variance, cfg)
    put = black_price(make_quote("put", strike=strike, maturity=0.75), variance, cfg)
    assert call - put == pytest.approx(math.exp(-rate * 0.75) * (50.0 - strike), abs=1e-12)


def test_monotonicity():
    """Call no creciente en K, no decreciente en p_T; put no decreciente en K"""
    strikes = np.linspace(30.0, 70.0, 41)
    calls = [black_price(make_quote("call", strike=k), 0.09) for k in strikes]
    puts = [black_price(make_quote("put", strike=k), 0.09) for k in strikes]
    assert np.all(np.diff(calls) <= 0)
    assert np.all(np.diff(puts) >= 0)
    q = make_quote("call", strike=55.0)
    prices = [black_price(q, v) for v in np.linspace(0.0, 2.0, 41)]
    assert np.all(np.diff(prices) >= 0)


def test_prices_within_bounds():
    """Precios dentro de las cotas de no arbitraje"""
    cfg = PricingConfig(risk_free_rate=0.03)
    for kind in ("call", "put"):
        for strike in (20.0, 50.0, 90.0):
            q = make_quote(kind, strike=strike, maturity=2.0)
            for variance in (0.0, 0.1, 5.0, 50.0):
                price = black_price(q, variance, cfg)
                lower, upper = price_bounds(q, cfg)
                assert lower - 1e-12 <= price <= upper + 1e-12
                assert within_no_arbitrage_bounds(q, price, cfg)


def test_negative_variance_rejected():
    """Varianza negativa"""
    with pytest.raises(NegativeVarianceError):
        black_price(make_quote(), -0.01)


# ==================== Pruebas de Precio con Modelo ====================

def test_gbm_is_black_base_case():
    """GBM reproduce Black con p_T = sigma^2 T"""
    q = make_quote("call", strike=100.0, maturity=1.0, underlying_price=100.0)
    assert price_with_model(q, GbmParams(sigma=0.2)) == pytest.approx(black_price(q, 0.04), rel=1e-15)


def test_methods_agree(lmrgw_params, synthetic_chain):
    """Precio con varianza analítica y numérica: diferencia relativa <= 1e-10"""
    analytical = price_chain(synthetic_chain.quotes, lmrgw_params, VarianceMethod.ANALYTICAL)
    numerical = price_chain(synthetic_chain.quotes, lmrgw_params, VarianceMethod.NUMERICAL)
    np.testing.assert_allclose(numerical, analytical, rtol=1e-10, atol=1e-13)


def test_price_chain_matches_single_quotes(lmrgw_params, synthetic_chain):
    """Cadena vectorizada frente a cotizaciones sueltas"""
    quotes = synthetic_chain.quotes[:15]
    chain = price_chain(quotes, lmrgw_params)
    single = [price_with_model(q, lmrgw_params) for q in quotes]
    np.testing.assert_allclose(chain, single, rtol=1e-14)


def test_price_chain_empty(lmrgw_params):
    """Cadena vacía"""
    assert price_chain([], lmrgw_params).size == 0


def test_price_nondecreasing_in_sigma1():
    """El precio no baja al subir sigma1"""
    q = make_quote("call", strike=52.0, maturity=0.5)
    prices = [
        price_with_model(q, LmrGwParams(lambda_=2.0, sigma1=s, sigma2=0.2))
        for s in np.linspace(0.0, 1.5, 16)
    ]
    assert np.all(np.diff(prices) >= 0)


def test_samuelson_shape():
    """sigma2 << sigma1: la volatilidad implícita cae con el vencimiento"""
    p = LmrGwParams(lambda_=2.0, sigma1=0.5, sigma2=0.05)
    maturities = [m / 12 for m in range(1, 13)]
    quotes = [make_quote("call", strike=50.0, maturity=t, quote_id=f"Q-{i}") for i, t in enumerate(maturities)]
    vols = [implied_vol(q, price_with_model(q, p)) for q in quotes]
    assert np.all(np.diff(vols) < 0)
    np.testing.assert_allclose(vols, model_implied_vols(p, maturities, VarianceMethod.ANALYTICAL), rtol=1e-8)


# ==================== Pruebas de Volatilidad Implícita ====================

@pytest.mark.parametrize("sigma", [0.01, 0.1, 0.3, 1.0, 3.0])
@pytest.mark.parametrize("maturity", [0.25, 1.0, 2.0])
def test_implied_vol_round_trip_atm(sigma, maturity):
    """Volatilidad implícita ATM de ida y vuelta"""
    for kind in ("call", "put"):
        q = make_quote(kind, strike=50.0, maturity=maturity)
        price = black_price(q, sigma * sigma * maturity)
        assert implied_vol(q, price) == pytest.approx(sigma, abs=1e-8)


@pytest.mark.parametrize("sigma", [0.2, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("strike", [40.0, 45.0, 55.0, 60.0])
def test_implied_vol_round_trip_off_money(sigma, strike):
    """Volatilidad implícita fuera del dinero"""
    q = make_quote("call" if strike >= 50.0 else "put", strike=strike, maturity=1.0)
    assert implied_vol(q, black_price(q, sigma * sigma)) == pytest.approx(sigma, abs=1e-8)


def test_implied_vol_near_intrinsic():
    """Precio = intrínseco + epsilon: sigma cerca de la cota inferior sin fallar"""
    q = make_quote("call", strike=40.0, maturity=0.5)
    sigma = implied_vol(q, 10.0 + 1e-12)
    assert IV_LOWER <= sigma < 0.1


def test_implied_vol_outside_bounds():
    """Precio fuera de cotas: NoSolutionError"""
    q = make_quote("call", strike=40.0, maturity=0.5)
    with pytest.raises(NoSolutionError):
        implied_vol(q, 9.0)
    with pytest.raises(NoSolutionError):
        implied_vol(q, 51.0)


@pytest.mark.slow
def test_methods_agree_full_chain(lmrgw_params):
    """500 cotizaciones sintéticas: discrepancia relativa <= 1e-10 por cotización"""
    chain = generate_synthetic_chain(lmrgw_params, n_quotes=500, noise_sd=0.25, rng_seed=1)
    analytical = price_chain(chain.quotes, lmrgw_params, VarianceMethod.ANALYTICAL)
    numerical = price_chain(chain.quotes, lmrgw_params, VarianceMethod.NUMERICAL)
    np.testing.assert_allclose(numerical, analytical, rtol=1e-10, atol=1e-13)
