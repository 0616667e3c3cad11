"""
Script para generar cadenas sintéticas de ejemplo (escala de los datos EEX/TTF)
Ejecutar: python -m scripts.generate_fixtures [directorio] [días]
"""
import sys
from datetime import date
from pathlib import Path

import numpy as np
import pandas as pd

from app.models import LmrGwParams
from app.services.data_io import generate_synthetic_chain, monthly_maturities, write_chain

MARKETS = {
    # etiqueta: (precio del subyacente, parámetros verdaderos)
    "EEX": (45.0, LmrGwParams(lambda_=2.5, sigma1=0.6, sigma2=0.25)),
    "TTF": (30.0, LmrGwParams(lambda_=1.5, sigma1=0.8, sigma2=0.3)),
}
FIRST_DAY = date(2024, 1, 2)


def create_fixture_chains(directory: Path, days: int = 5, seed: int = 0) -> list[Path]:
    """Escribir `days` cadenas por mercado con 430-720 opciones y ruido de 0.5% de S0"""
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    written = []
    for label, (s0, params) in MARKETS.items():
        for trade_day in pd.bdate_range(FIRST_DAY, periods=days):
            trade_date = trade_day.date()
            chain = generate_synthetic_chain(
                params,
                n_quotes=int(rng.integers(430, 721)),
                maturities=monthly_maturities(trade_date, int(rng.integers(7, 26))),
                noise_sd=0.005 * s0,
                rng_seed=int(rng.integers(2**31)),
                underlying_price=s0,
                market_label=label,
                trade_date=trade_date,
            )
            path = directory / f"{label}_{trade_date.isoformat()}.csv"
            write_chain(chain, path)
            written.append(path)
            print(f"  ✅ {path} ({len(chain.quotes)} opciones)")
    return written


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    n_days = int(sys.argv[2]) if len(sys.argv) > 2 else 5
    print(f"🔄 Generando cadenas sintéticas en {target}...")
    files = create_fixture_chains(target, n_days)
    print(f"✅ {len(files)} cadenas escritas")
