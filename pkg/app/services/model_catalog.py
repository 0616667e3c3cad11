"""Catálogo de modelos y su forma lineal en espacio de estados."""
from typing import Any, Mapping, Optional

import numpy as np
from pydantic import ValidationError

from app.exceptions import InvalidInputError, InvalidParameterError
from app.models import (
    PARAMS_BY_KIND,
    GbmParams,
    LinearSde,
    LmrGwParams,
    ModelKind,
    ModelParams,
    OuParams,
    SchwartzParams,
)


def build_params(kind: ModelKind | str, mapping: Mapping[str, Any]) -> ModelParams:
    """Construir los parámetros de un modelo a partir de un diccionario"""
    try:
        params_cls = PARAMS_BY_KIND[ModelKind(kind)]
    except ValueError as exc:
        raise InvalidParameterError(f"unknown model kind: {kind}") from exc
    try:
        return params_cls.model_validate(dict(mapping))
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'params'}: {err['msg']}"
            for err in exc.errors()
        )
        raise InvalidParameterError(f"invalid {params_cls.kind.value} parameters: {details}") from exc


def _zero_covariance(P0: Optional[np.ndarray], n: int) -> np.ndarray:
    if P0 is None:
        return np.zeros((n, n))
    P0 = np.asarray(P0, dtype=float)
    if P0.shape != (n, n):
        raise InvalidInputError(f"initial covariance must be {n}x{n}, got {P0.shape}")
    return P0


def lmrgw_to_sde(p: LmrGwParams, P0: Optional[np.ndarray] = None) -> LinearSde:
    lam = p.lambda_
    return LinearSde(
        A=[[-lam, lam], [0.0, 0.0]],
        B=np.diag([p.sigma1, p.sigma2]),
        C=[1.0, 0.0],
        S=np.eye(2),
        x0_mean=np.zeros(2),
        P0=_zero_covariance(P0, 2),
    )


def schwartz_to_sde(p: SchwartzParams) -> LinearSde:
    """Forma de estado de Schwartz-Smith: x = [chi, xi], y = chi + xi, P0 = 0"""
    return LinearSde(
        A=[[-p.k, 0.0], [0.0, 0.0]],
        B=np.diag([p.sigma_chi, p.sigma_xi]),
        C=[1.0, 1.0],
        S=[[1.0, p.rho], [p.rho, 1.0]],
        x0_mean=np.zeros(2),
        P0=np.zeros((2, 2)),
    )


def gbm_to_sde(p: GbmParams) -> LinearSde:
    return LinearSde(
        A=[[0.0]], B=[[p.sigma]], C=[1.0], S=[[1.0]], x0_mean=[0.0], P0=[[0.0]]
    )


def ou_to_sde(p: OuParams, P0_11: float = 0.0) -> LinearSde:
    return LinearSde(
        A=[[-p.lambda_]], B=[[p.sigma]], C=[1.0], S=[[1.0]],
        x0_mean=[p.level], P0=[[P0_11]],
    )


def to_sde(model: ModelParams, P0: Optional[np.ndarray] = None) -> LinearSde:
    """Despachar la conversión a LinearSde según el tipo de modelo"""
    if isinstance(model, LmrGwParams):
        return lmrgw_to_sde(model, P0)
    if isinstance(model, SchwartzParams):
        return schwartz_to_sde(model)
    if isinstance(model, OuParams):
        p11 = 0.0 if P0 is None else float(np.asarray(P0, dtype=float).reshape(-1)[0])
        return ou_to_sde(model, p11)
    if isinstance(model, GbmParams):
        return gbm_to_sde(model)
    raise InvalidParameterError(f"unsupported model: {type(model).__name__}")


def gbm_variance(p: GbmParams, t):
    """Varianza del log-precio de un GBM: sigma^2 t"""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidInputError("t must be non-negative")
    value = p.sigma**2 * t
    return float(value) if value.ndim == 0 else value


def ou_variance(p: OuParams, P0_11: float, t):
    """Varianza de Ornstein-Uhlenbeck con condición inicial P0_11"""
    if np.any(np.asarray(t) < 0):
        raise InvalidInputError("t must be non-negative")
    decay = np.exp(-2.0 * p.lambda_ * np.asarray(t, dtype=float))
    value = p.sigma**2 / (2.0 * p.lambda_) * (1.0 - decay) + P0_11 * decay
    return float(value) if np.ndim(value) == 0 else value

