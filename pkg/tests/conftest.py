from pathlib import Path

import numpy as np
import pytest

from app.models import (
    LmrGwParams,
    OptionKind,
    OptionQuote,
    SchwartzParams,
)
from app.services.data_io import generate_synthetic_chain

FIXTURES = Path(__file__).parent / "fixtures"

# Parámetros verdaderos de las pruebas de ida y vuelta
TRUE_LMRGW = {"lambda": 2.0, "sigma1": 0.5, "sigma2": 0.2}


def make_quote(
    kind: str = "call",
    strike: float = 50.0,
    maturity: float = 0.5,
    underlying_price: float = 50.0,
    market_price: float = 0.0,
    quote_id: str = "Q-0001",
) -> OptionQuote:
    """Crear una cotización de prueba"""
    return OptionQuote(
        id=quote_id,
        kind=OptionKind(kind),
        strike=strike,
        maturity=maturity,
        underlying_price=underlying_price,
        market_price=market_price,
    )


def random_psd(rng: np.random.Generator, n: int = 2, scale: float = 0.1) -> np.ndarray:
    """Matriz simétrica semidefinida positiva aleatoria"""
    m = rng.normal(0.0, scale, size=(n, n))
    return m @ m.T


def random_lmrgw(rng: np.random.Generator) -> LmrGwParams:
    return LmrGwParams(
        lambda_=float(rng.uniform(0.1, 20.0)),
        sigma1=float(rng.uniform(0.01, 2.0)),
        sigma2=float(rng.uniform(0.01, 2.0)),
    )


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def lmrgw_params() -> LmrGwParams:
    return LmrGwParams.model_validate(TRUE_LMRGW)


@pytest.fixture
def schwartz_params() -> SchwartzParams:
    return SchwartzParams(k=1.5, sigma_chi=0.3, sigma_xi=0.15, rho=0.3)


@pytest.fixture(scope="session")
def synthetic_chain():
    """Cadena sin ruido: 100 opciones, 12 vencimientos mensuales, moneyness 0.8-1.2"""
    return generate_synthetic_chain(
        LmrGwParams.model_validate(TRUE_LMRGW),
        n_quotes=100,
        rng_seed=0,
        market_label="SYN",
    )
