"""Covarianza del estado de sistemas lineales estocásticos.

Dos caminos equivalentes:

* fórmulas cerradas (LMR-GW, Schwartz-Smith, OU, GBM), O(1) por instante;
* método numérico general: se exponencia una sola vez la matriz por bloques
  [[A, BSB^T], [0, -A^T]] t y P(t) = (F11 P0 + F12) F22^{-1}.

`lagrange_covariance` evalúa la fórmula de Lagrange por cuadratura de Simpson
y sirve solo como verificación cruzada.
"""
import math
from typing import Callable

import numpy as np
from scipy import integrate, linalg

from app.exceptions import InvalidInputError, InvalidParameterError, NegativeVarianceError
from app.models import (
    GbmParams,
    LinearSde,
    LmrGwParams,
    ModelParams,
    OuParams,
    SchwartzParams,
    StateCovariance,
)
from app.services.matrix_kernels import mat_exp, solve_linear
from app.services.model_catalog import gbm_variance, ou_variance, to_sde

NEGATIVE_VARIANCE_TOLERANCE = 1e-12


def clamp_variance(value):
    """Llevar a 0 el ruido numérico negativo; error por debajo de -1e-12"""
    arr = np.asarray(value, dtype=float)
    if np.any(arr < -NEGATIVE_VARIANCE_TOLERANCE):
        raise NegativeVarianceError(f"negative variance {arr.min():.3e}")
    out = np.maximum(arr, 0.0)
    return float(out) if out.ndim == 0 else out


def _initial_covariance(P0, n: int) -> np.ndarray:
    if P0 is None:
        return np.zeros((n, n))
    P0 = np.asarray(P0, dtype=float)
    if P0.shape != (n, n):
        raise InvalidInputError(f"initial covariance must be {n}x{n}, got {P0.shape}")
    return P0


# ==================== Soluciones analíticas ====================
def lmrgw_covariance_entries(p: LmrGwParams, P0, t):
    """Entradas (P11, P12, P22) de la solución cerrada LMR-GW; t escalar o vector"""
    if p.lambda_ <= 0:
        raise InvalidParameterError(f"lambda must be positive, got {p.lambda_}")
    P0 = _initial_covariance(P0, 2)
    p11, p12, p22 = P0[0, 0], P0[0, 1], P0[1, 1]
    lam = p.lambda_
    s1 = p.sigma1 * p.sigma1
    s2 = p.sigma2 * p.sigma2
    e1 = np.exp(-lam * t)
    e2 = e1 * e1

    P11 = (
        (p11 - 2.0 * p12 + p22 - (s1 + s2) / (2.0 * lam)) * e2
        + 2.0 * (p12 - p22 + s2 / lam) * e1
        + s2 * t
        + (s1 - 3.0 * s2) / (2.0 * lam)
        + p22
    )
    P12 = (p12 - p22 + s2 / lam) * e1 + s2 * t + p22 - s2 / lam
    P22 = s2 * t + p22
    return P11, P12, P22


def lmrgw_covariance_analytical(p: LmrGwParams, P0, t: float) -> StateCovariance:
    if t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    if t == 0:
        return StateCovariance(t=0.0, P=_initial_covariance(P0, 2).copy())
    P11, P12, P22 = lmrgw_covariance_entries(p, P0, t)
    return StateCovariance(t=float(t), P=np.array([[P11, P12], [P12, P22]]))


def schwartz_covariance_analytical(p: SchwartzParams, t: float) -> StateCovariance:
    """Covarianza cerrada de [chi, xi] con P0 = 0"""
    if p.k <= 0:
        raise InvalidParameterError(f"k must be positive, got {p.k}")
    if t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    # la entrada (1,1) lleva sigma_chi^2 (el factor sin cuadrado no es dimensionalmente válido)
    P11 = p.sigma_chi**2 / (2.0 * p.k) * -np.expm1(-2.0 * p.k * t)
    P12 = p.rho * p.sigma_chi * p.sigma_xi / p.k * -np.expm1(-p.k * t)
    P22 = p.sigma_xi**2 * t
    return StateCovariance(t=float(t), P=np.array([[P11, P12], [P12, P22]]))


def schwartz_variance(p: SchwartzParams, t):
    """Varianza del log-precio X = chi + xi; t escalar o vector"""
    if p.k <= 0:
        raise InvalidParameterError(f"k must be positive, got {p.k}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidInputError("t must be non-negative")
    value = (
        p.sigma_chi**2 / (2.0 * p.k) * -np.expm1(-2.0 * p.k * t)
        + 2.0 * p.rho * p.sigma_chi * p.sigma_xi / p.k * -np.expm1(-p.k * t)
        + p.sigma_xi**2 * t
    )
    return clamp_variance(value)


def analytical_output_variance(model: ModelParams, times, P0=None) -> np.ndarray:
    """Varianza de salida por fórmula cerrada en un vector de tiempos"""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise InvalidInputError("times must be non-negative")
    if isinstance(model, LmrGwParams):
        values = lmrgw_covariance_entries(model, P0, times)[0]
    elif isinstance(model, SchwartzParams):
        values = schwartz_variance(model, times)
    elif isinstance(model, OuParams):
        p11 = 0.0 if P0 is None else float(np.asarray(P0, dtype=float).reshape(-1)[0])
        values = ou_variance(model, p11, times)
    elif isinstance(model, GbmParams):
        values = gbm_variance(model, times)
    else:
        raise InvalidParameterError(f"no closed form for {type(model).__name__}")
    return np.atleast_1d(clamp_variance(values))


def _clamp_scalar(value: float) -> float:
    if value < -NEGATIVE_VARIANCE_TOLERANCE:
        raise NegativeVarianceError(f"negative variance {value:.3e}")
    return value if value > 0.0 else 0.0


def scalar_variance_function(model: ModelParams, P0=None) -> Callable[[float], float]:
    """Varianza cerrada como función de un único instante float.

    Valida y precalcula los coeficientes una sola vez; cada llamada usa solo
    `math`, sin reservar arreglos. Coincide con `analytical_output_variance`.
    """
    if isinstance(model, LmrGwParams):
        if model.lambda_ <= 0:
            raise InvalidParameterError(f"lambda must be positive, got {model.lambda_}")
        P = _initial_covariance(P0, 2)
        p11, p12, p22 = float(P[0, 0]), float(P[0, 1]), float(P[1, 1])
        lam = model.lambda_
        s1 = model.sigma1 * model.sigma1
        s2 = model.sigma2 * model.sigma2
        quadratic = p11 - 2.0 * p12 + p22 - (s1 + s2) / (2.0 * lam)
        linear = 2.0 * (p12 - p22 + s2 / lam)
        constant = (s1 - 3.0 * s2) / (2.0 * lam) + p22

        def variance(t: float) -> float:
            if t < 0:
                raise InvalidInputError(f"t must be non-negative, got {t}")
            e1 = math.exp(-lam * t)
            return _clamp_scalar(quadratic * e1 * e1 + linear * e1 + s2 * t + constant)

    elif isinstance(model, SchwartzParams):
        if model.k <= 0:
            raise InvalidParameterError(f"k must be positive, got {model.k}")
        k = model.k
        chi = model.sigma_chi**2 / (2.0 * k)
        cross = 2.0 * model.rho * model.sigma_chi * model.sigma_xi / k
        xi = model.sigma_xi**2

        def variance(t: float) -> float:
            if t < 0:
                raise InvalidInputError(f"t must be non-negative, got {t}")
            return _clamp_scalar(-chi * math.expm1(-2.0 * k * t) - cross * math.expm1(-k * t) + xi * t)

    elif isinstance(model, OuParams):
        p11 = 0.0 if P0 is None else float(np.asarray(P0, dtype=float).reshape(-1)[0])
        rate = 2.0 * model.lambda_
        stationary = model.sigma**2 / rate

        def variance(t: float) -> float:
            if t < 0:
                raise InvalidInputError(f"t must be non-negative, got {t}")
            decay = math.exp(-rate * t)
            return _clamp_scalar(stationary * (1.0 - decay) + p11 * decay)

    elif isinstance(model, GbmParams):
        s = model.sigma**2

        def variance(t: float) -> float:
            if t < 0:
                raise InvalidInputError(f"t must be non-negative, got {t}")
            return s * t

    else:
        raise InvalidParameterError(f"no closed form for {type(model).__name__}")
    return variance


# ==================== Solución numérica ====================
def _block_generator(sde: LinearSde) -> np.ndarray:
    n = sde.order
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = sde.A
    block[:n, n:] = sde.noise_covariance
    block[n:, n:] = -sde.A.T
    return block


def lyapunov_numerical(sde: LinearSde, t: float) -> StateCovariance:
    """P(t) = (F11 P0 + F12) F22^{-1} con F = exp([[A, BSB^T], [0, -A^T]] t)"""
    if t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    n = sde.order
    F = mat_exp(_block_generator(sde) * t)
    F11, F12, F22 = F[:n, :n], F[:n, n:], F[n:, n:]
    rhs = F11 @ sde.P0 + F12
    # X F22 = rhs  <=>  F22^T X^T = rhs^T
    P = solve_linear(F22.T, rhs.T).T
    return StateCovariance(t=float(t), P=0.5 * (P + P.T))


def lyapunov_numerical_batch(sde: LinearSde, times) -> list[StateCovariance]:
    """Versión por lotes: una exponencial apilada para todo el vector de tiempos"""
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        return []
    if np.any(times < 0):
        raise InvalidInputError("times must be non-negative")
    if np.any(np.diff(times) < 0):
        raise InvalidInputError("times must be sorted in non-decreasing order")

    n = sde.order
    F = linalg.expm(_block_generator(sde)[None, :, :] * times[:, None, None])
    F11, F12, F22 = F[:, :n, :n], F[:, :n, n:], F[:, n:, n:]
    rhs = F11 @ sde.P0 + F12
    P = np.linalg.solve(F22.transpose(0, 2, 1), rhs.transpose(0, 2, 1)).transpose(0, 2, 1)
    P = 0.5 * (P + P.transpose(0, 2, 1))
    return [StateCovariance(t=float(t), P=P[i].copy()) for i, t in enumerate(times)]


def numerical_output_variance(model: ModelParams, times, P0=None) -> np.ndarray:
    """Varianza de salida por el método de bloques, un instante por llamada"""
    sde = to_sde(model, P0)
    return np.array(
        [output_variance(sde, lyapunov_numerical(sde, float(t))) for t in np.atleast_1d(times)]
    )


# ==================== Fórmula de Lagrange (verificación) ====================
def lagrange_covariance(sde: LinearSde, t: float, quad_points: int) -> StateCovariance:
    """e^{At} P0 e^{A^T t} + integral del gramiano por Simpson compuesto"""
    if t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    if quad_points < 2:
        raise InvalidInputError(f"quad_points must be at least 2, got {quad_points}")
    if t == 0:
        return StateCovariance(t=0.0, P=np.array(sde.P0))

    E_t = mat_exp(sde.A * t)
    free = E_t @ sde.P0 @ E_t.T

    # s = t - z recorre [0, t]
    s = np.linspace(0.0, t, quad_points)
    E = linalg.expm(sde.A[None, :, :] * s[:, None, None])
    integrand = E @ sde.noise_covariance @ E.transpose(0, 2, 1)
    gramian = integrate.simpson(integrand, x=s, axis=0)

    P = free + gramian
    return StateCovariance(t=float(t), P=0.5 * (P + P.T))


def output_variance(sde: LinearSde, P: StateCovariance) -> float:
    """Var[y] = C P C^T"""
    if P.P.shape != (sde.order, sde.order):
        raise InvalidInputError(
            f"covariance shape {P.P.shape} does not match system order {sde.order}"
        )
    return clamp_variance(float(sde.C @ P.P @ sde.C))
