"""Calibración de mercado por mínimos cuadrados sobre precios de opciones."""
import logging
import math
from collections import defaultdict
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from app.exceptions import (
    AppError,
    InvalidInputError,
    InvalidParameterError,
    NoSolutionError,
    UnderdeterminedError,
)
from app.models import (
    PARAMS_BY_KIND,
    CalibrationConfig,
    CalibrationResult,
    FitReport,
    GbmParams,
    LmrGwParams,
    ModelKind,
    ModelParams,
    OptionQuote,
    OuParams,
    PricingConfig,
    QuoteFit,
    QuoteSubset,
    SchwartzParams,
    SurfacePoint,
    VarianceMethod,
)
from app.models.params import Transform
from app.services.model_catalog import build_params
from app.services.pricing import (
    ChainArrays,
    implied_vol,
    model_implied_vols,
    price_arrays,
    price_chain,
    within_no_arbitrage_bounds,
)
from app.services.seeding import spawn_seeds

logger = logging.getLogger(__name__)

DEFAULT_VOL = 0.3
MIN_START_VOL = 0.01
RESTART_JITTER = 0.3
PARAMETER_TOLERANCE = 1e-8
POLISH_TOLERANCE = 1e-14
PENALTY_RESIDUAL = 1e6


def loss(
    params: ModelParams,
    quotes: Sequence[OptionQuote],
    method: VarianceMethod = VarianceMethod.ANALYTICAL,
    pricing: Optional[PricingConfig] = None,
    P0=None,
) -> float:
    """Suma de errores cuadráticos entre precios de mercado y del modelo"""
    if not quotes:
        raise InvalidInputError("loss needs at least one quote")
    arrays = ChainArrays.from_quotes(quotes)
    prices = price_arrays(arrays, params, method, pricing, P0)
    return float(np.sum((arrays.market - prices) ** 2))


class _LossObjective:
    """Pérdida sobre el vector transformado; fuera del dominio devuelve +inf"""

    def __init__(self, template, arrays, method, pricing, P0):
        self.template = template
        self.arrays = arrays
        self.method = method
        self.pricing = pricing
        self.P0 = P0
        self.evaluations = 0

    def _residuals(self, theta: np.ndarray) -> Optional[np.ndarray]:
        self.evaluations += 1
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                params = self.template.with_vector(theta)
                prices = price_arrays(self.arrays, params, self.method, self.pricing, self.P0)
        except (AppError, ValueError, FloatingPointError):
            return None
        out = self.arrays.market - prices
        return out if np.all(np.isfinite(out)) else None

    def residuals(self, theta: np.ndarray) -> np.ndarray:
        """Mercado menos modelo; fuera del dominio, un residuo de penalización"""
        r = self._residuals(theta)
        return np.full(self.arrays.market.shape, PENALTY_RESIDUAL) if r is None else r

    def __call__(self, theta: np.ndarray) -> float:
        r = self._residuals(theta)
        if r is None:
            return math.inf
        value = float(np.sum(r**2))
        return value if math.isfinite(value) else math.inf


def _polish(objective: _LossObjective, x0: np.ndarray, value: float) -> tuple[np.ndarray, float]:
    """Refinar el mejor arranque con mínimos cuadrados de región de confianza.

    Nelder-Mead compara pérdidas y se detiene en torno a sqrt(eps) en los
    parámetros; sobre el vector de residuos el refinamiento llega cerca de
    eps. Solo se acepta si no empeora la pérdida.
    """
    res = optimize.least_squares(
        objective.residuals,
        x0,
        jac="3-point",
        method="trf",
        xtol=POLISH_TOLERANCE,
        ftol=POLISH_TOLERANCE,
        gtol=POLISH_TOLERANCE,
    )
    polished = objective(res.x)
    logger.debug("Refinamiento: pérdida %.6g -> %.6g (%d evaluaciones)", value, polished, res.nfev)
    if polished <= value:
        return res.x, polished
    return x0, value


def train_test_split(
    quotes: Sequence[OptionQuote], train_fraction: float, rng_seed: int
) -> tuple[list[OptionQuote], list[OptionQuote]]:
    """Partición aleatoria uniforme; conserva el orden de entrada en cada parte"""
    if not quotes:
        raise InvalidInputError("cannot split an empty quote list")
    if not 0 < train_fraction <= 1:
        raise InvalidInputError(f"train_fraction must be in (0, 1], got {train_fraction}")

    n = len(quotes)
    n_train = min(n, max(1, int(round(train_fraction * n))))
    order = np.random.default_rng(rng_seed).permutation(n)
    in_train = np.zeros(n, dtype=bool)
    in_train[order[:n_train]] = True
    train = [q for q, flag in zip(quotes, in_train) if flag]
    test = [q for q, flag in zip(quotes, in_train) if not flag]
    return train, test


def _atm_implied_vol(quotes: Sequence[OptionQuote], pricing: PricingConfig) -> float:
    atm = min(quotes, key=lambda q: (abs(q.moneyness - 1.0), q.id))
    try:
        return max(implied_vol(atm, atm.market_price, pricing), MIN_START_VOL)
    except NoSolutionError:
        return DEFAULT_VOL


def default_initial_guess(
    quotes: Sequence[OptionQuote], kind: ModelKind, pricing: Optional[PricingConfig] = None
) -> ModelParams:
    """lambda = 1, vol corta = IV ATM del primer vencimiento, vol larga = IV ATM del último"""
    pricing = pricing or PricingConfig()
    by_maturity = defaultdict(list)
    for q in quotes:
        by_maturity[q.maturity].append(q)
    shortest, longest = min(by_maturity), max(by_maturity)
    short_vol = _atm_implied_vol(by_maturity[shortest], pricing)
    long_vol = _atm_implied_vol(by_maturity[longest], pricing)

    kind = ModelKind(kind)
    if kind is ModelKind.LMRGW:
        return LmrGwParams(lambda_=1.0, sigma1=short_vol, sigma2=long_vol)
    if kind is ModelKind.SCHWARTZ:
        return SchwartzParams(k=1.0, sigma_chi=short_vol, sigma_xi=long_vol, rho=0.0)
    if kind is ModelKind.OU:
        return OuParams(lambda_=1.0, sigma=short_vol)
    return GbmParams(sigma=0.5 * (short_vol + long_vol))


def _check_identifiable(quotes: Sequence[OptionQuote], kind: ModelKind) -> None:
    params_cls = PARAMS_BY_KIND[kind]
    n_free = len(params_cls.calibrated_fields)
    n_maturities = len({q.maturity for q in quotes})
    if len(quotes) < n_free or n_maturities < params_cls.min_maturities:
        raise UnderdeterminedError(
            f"{kind.value} has {n_free} free parameters and needs at least {n_free} quotes "
            f"over {params_cls.min_maturities} maturities; got {len(quotes)} quotes "
            f"over {n_maturities} maturities"
        )


def _starting_template(quotes, kind, cfg, pricing) -> ModelParams:
    if cfg.initial_guess is None:
        return default_initial_guess(quotes, kind, pricing)
    template = build_params(kind, cfg.initial_guess)
    for name, transform in zip(template.calibrated_fields, template.transforms):
        if transform is Transform.LOG and getattr(template, name) <= 0:
            raise InvalidParameterError(f"initial guess for {name} must be strictly positive")
    return template


def calibrate(
    quotes: Sequence[OptionQuote],
    kind: ModelKind | str,
    cfg: Optional[CalibrationConfig] = None,
    pricing: Optional[PricingConfig] = None,
    P0=None,
) -> CalibrationResult:
    """Ajustar los parámetros con Nelder-Mead multi-arranque y refinar el mejor.

    Las cotizaciones se ordenan por id antes de partir y ajustar, de modo que
    el resultado no depende del orden de la lista de entrada.
    """
    kind = ModelKind(kind)
    cfg = cfg or CalibrationConfig()
    pricing = pricing or PricingConfig()
    if not quotes:
        raise InvalidInputError("calibration needs at least one quote")

    ordered = sorted(quotes, key=lambda q: q.id)
    valid, dropped = [], []
    for q in ordered:
        if within_no_arbitrage_bounds(q, q.market_price, pricing):
            valid.append(q)
        else:
            dropped.append(q)
            logger.warning("Cotización %s fuera de cotas de no arbitraje, descartada", q.id)
    if not valid:
        raise InvalidInputError("no quote satisfies the no-arbitrage bounds")

    split_seed, search_seed = spawn_seeds(cfg.rng_seed, 2)
    train, test = train_test_split(valid, cfg.train_fraction, split_seed)
    _check_identifiable(train, kind)

    template = _starting_template(train, kind, cfg, pricing)
    arrays = ChainArrays.from_quotes(train)
    objective = _LossObjective(template, arrays, cfg.method, pricing, P0)

    rng = np.random.default_rng(search_seed)
    base = template.to_vector()
    starts = [base] + [
        base + rng.normal(0.0, RESTART_JITTER, size=base.size) for _ in range(cfg.restarts - 1)
    ]

    best = None
    iterations = 0
    for i, x0 in enumerate(starts):
        start_loss = objective(x0)
        fatol = cfg.loss_tolerance * max(start_loss, 1.0) if math.isfinite(start_loss) else 1e-12
        res = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iterations,
                "maxfev": 4 * cfg.max_iterations,
                "xatol": PARAMETER_TOLERANCE,
                "fatol": fatol,
            },
        )
        iterations += int(res.nit)
        logger.info(
            "Arranque %d/%d: pérdida %.6g -> %.6g (%d iteraciones)",
            i + 1, len(starts), start_loss, res.fun, res.nit,
        )
        if best is None or res.fun < best.fun:
            best = res

    if not math.isfinite(best.fun):
        raise NoSolutionError(f"{kind.value} calibration found no finite loss")
    theta, final_loss = _polish(objective, best.x, float(best.fun))
    fitted = template.with_vector(theta)

    fitted_prices = price_chain(ordered, fitted, cfg.method, pricing, P0)
    train_ids = {q.id for q in train}
    test_ids = {q.id for q in test}
    rows = []
    for q, price in zip(ordered, fitted_prices):
        subset = (
            QuoteSubset.TRAIN if q.id in train_ids
            else QuoteSubset.TEST if q.id in test_ids
            else QuoteSubset.DROPPED
        )
        rows.append(_quote_fit(q, float(price), subset))

    train_errors = [r.absolute_error for r in rows if r.subset is QuoteSubset.TRAIN]
    test_errors = [r.absolute_error for r in rows if r.subset is QuoteSubset.TEST]

    return CalibrationResult(
        model=kind,
        method=cfg.method,
        parameters=fitted.calibrated_values(),
        final_loss=final_loss,
        iterations=iterations,
        function_evaluations=objective.evaluations,
        converged=bool(best.success),
        restarts=cfg.restarts,
        rng_seed=cfg.rng_seed,
        n_train=len(train),
        n_test=len(test),
        n_dropped=len(dropped),
        train_rmse=_rmse(train_errors),
        test_rmse=_rmse(test_errors) if test_errors else None,
        per_quote_fit=rows,
    )


def _quote_fit(q: OptionQuote, price: float, subset: QuoteSubset) -> QuoteFit:
    error = abs(q.market_price - price)
    return QuoteFit(
        quote_id=q.id,
        subset=subset,
        market_price=q.market_price,
        fitted_price=price,
        absolute_error=error,
        relative_error=error / q.market_price if q.market_price > 0 else None,
    )


def _rmse(errors: Sequence[float]) -> float:
    return math.sqrt(float(np.mean(np.square(errors)))) if len(errors) else 0.0


def evaluate_fit(
    result: CalibrationResult,
    quotes: Sequence[OptionQuote],
    method: Optional[VarianceMethod] = None,
    pricing: Optional[PricingConfig] = None,
    P0=None,
    subset: QuoteSubset = QuoteSubset.TEST,
) -> FitReport:
    """RMSE fuera de muestra, errores por cotización y superficie de volatilidad"""
    if not quotes:
        return FitReport()
    method = method or result.method
    pricing = pricing or PricingConfig()
    params = build_params(result.model, result.parameters)

    prices = price_chain(quotes, params, method, pricing, P0)
    rows = [_quote_fit(q, float(p), subset) for q, p in zip(quotes, prices)]

    model_vols = model_implied_vols(params, [q.maturity for q in quotes], method, P0)
    surface = []
    for q, model_vol in zip(quotes, model_vols):
        try:
            market_vol = implied_vol(q, q.market_price, pricing)
        except NoSolutionError as exc:
            logger.warning("Sin volatilidad implícita para %s: %s", q.id, exc)
            continue
        surface.append(
            SurfacePoint(
                maturity_years=q.maturity,
                moneyness=q.moneyness,
                model_implied_vol=float(model_vol),
                market_implied_vol=market_vol,
            )
        )

    return FitReport(
        rmse=_rmse([r.absolute_error for r in rows]),
        rows=rows,
        surface=surface,
    )
