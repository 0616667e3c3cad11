"""Primitivas de matrices densas pequeñas para los solvers de Lyapunov.

`mat_exp` usa el aproximante de Padé de grado 13 con escalado y elevación al
cuadrado de `scipy.linalg.expm`; `solve_linear` factoriza LU con pivoteo
parcial. `integrate_lyapunov_ode` es un oráculo RK4 para pruebas y no se usa
en las rutas de precios.
"""
import numpy as np
from scipy import linalg

from app.exceptions import InvalidInputError, SingularMatrixError

RESIDUAL_TOLERANCE = 1e-12


def as_square_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validar y convertir a matriz cuadrada finita de float64"""
    out = np.asarray(m, dtype=float)
    if out.ndim != 2 or out.shape[0] != out.shape[1] or out.shape[0] < 1:
        raise InvalidInputError(f"{name} must be a non-empty square matrix, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return out


def mat_exp(m) -> np.ndarray:
    """Exponencial de matriz exp(m)"""
    return linalg.expm(as_square_matrix(m))


def solve_linear(m, rhs) -> np.ndarray:
    """Resolver m X = rhs sin formar la inversa

    Solo se rechazan pivotes nulos o no finitos: exp(-A^T t) es invertible
    aunque su número de condición crezca como e^(λt). La solución se acepta si
    el residuo queda en 1e-12 de la escala |m|·|X| + |rhs|.
    """
    a = as_square_matrix(m)
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise InvalidInputError(f"rhs has {b.shape[0]} rows, matrix has order {a.shape[0]}")

    lu, piv = linalg.lu_factor(a, check_finite=False)
    pivots = np.diag(lu)
    if not np.all(np.isfinite(pivots)) or np.any(pivots == 0.0):
        raise SingularMatrixError("matrix is singular")
    x = linalg.lu_solve((lu, piv), b, check_finite=False)
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("solution is not finite")

    residual = np.linalg.norm(a @ x - b)
    scale = np.linalg.norm(np.abs(a) @ np.abs(x)) + np.linalg.norm(b)
    if residual > RESIDUAL_TOLERANCE * scale:
        raise SingularMatrixError(f"residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:.0e} of scale {scale:.3e}")
    return x


def _lyapunov_rhs(A: np.ndarray, Q: np.ndarray, P: np.ndarray) -> np.ndarray:
    return A @ P + P @ A.T + Q


def integrate_lyapunov_ode(A, Q, P0, t: float, steps: int) -> np.ndarray:
    """Integrar dP/dt = AP + PA^T + Q con RK4 de paso fijo"""
    if t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    if steps < 1:
        raise InvalidInputError(f"steps must be positive, got {steps}")

    A = as_square_matrix(A, "A")
    Q = as_square_matrix(Q, "Q")
    P = as_square_matrix(P0, "P0").copy()
    if t == 0:
        return P

    h = t / steps
    for _ in range(steps):
        k1 = _lyapunov_rhs(A, Q, P)
        k2 = _lyapunov_rhs(A, Q, P + 0.5 * h * k1)
        k3 = _lyapunov_rhs(A, Q, P + 0.5 * h * k2)
        k4 = _lyapunov_rhs(A, Q, P + h * k3)
        P = P + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        P = 0.5 * (P + P.T)
    return P
