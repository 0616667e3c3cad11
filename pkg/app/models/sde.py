from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from app.exceptions import InvalidInputError, NegativeVarianceError

PSD_TOLERANCE = 1e-12


def _frozen(array, name: str, ndim: int) -> np.ndarray:
    out = np.array(array, dtype=float, ndmin=ndim)
    if out.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-dimensional, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise InvalidInputError(f"{name} has non-finite entries")
    out.setflags(write=False)
    return out


def is_symmetric_psd(m: np.ndarray, tolerance: float = PSD_TOLERANCE) -> bool:
    """Simétrica y con autovalor mínimo >= -tolerance * max(1, traza)"""
    if m.shape[0] != m.shape[1] or not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
        return False
    scale = max(1.0, abs(float(np.trace(m))))
    return float(np.linalg.eigvalsh(m).min()) >= -tolerance * scale


@dataclass(frozen=True)
class LinearSde:
    """Representación en espacio de estados dx = Ax dt + B dw, y = Cx.

    `S` es la matriz de correlación del ruido; se admite semidefinida para
    los casos rho = +-1.
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    S: np.ndarray
    x0_mean: np.ndarray
    P0: np.ndarray

    def __post_init__(self):
        for name, ndim in (("A", 2), ("B", 2), ("C", 1), ("S", 2), ("x0_mean", 1), ("P0", 2)):
            object.__setattr__(self, name, _frozen(getattr(self, name), name, ndim))

        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise InvalidInputError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise InvalidInputError(f"B must have {n} rows, got {self.B.shape}")
        m = self.B.shape[1]
        if self.S.shape != (m, m):
            raise InvalidInputError(f"S must be {m}x{m}, got {self.S.shape}")
        if self.C.shape != (n,) or self.x0_mean.shape != (n,):
            raise InvalidInputError("C and x0_mean must have one entry per state")
        if self.P0.shape != (n, n):
            raise InvalidInputError(f"P0 must be {n}x{n}, got {self.P0.shape}")
        if not np.allclose(np.diag(self.S), 1.0) or not is_symmetric_psd(self.S):
            raise InvalidInputError("S must be a symmetric PSD correlation matrix")
        if not is_symmetric_psd(self.P0):
            raise InvalidInputError("P0 must be symmetric positive semidefinite")

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @cached_property
    def noise_covariance(self) -> np.ndarray:
        """Q = B S B^T"""
        q = self.B @ self.S @ self.B.T
        q = 0.5 * (q + q.T)
        q.setflags(write=False)
        return q


@dataclass(frozen=True)
class StateCovariance:
    """Covarianza del estado P(t) en el instante t (años)"""
    t: float
    P: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.t < 0:
            raise InvalidInputError(f"time must be non-negative, got {self.t}")
        P = _frozen(self.P, "P", 2)
        if P.shape[0] != P.shape[1]:
            raise InvalidInputError(f"covariance must be square, got {P.shape}")
        if not np.allclose(P, P.T, rtol=0.0, atol=1e-12):
            raise InvalidInputError("covariance must be symmetric")
        if not is_symmetric_psd(P):
            raise NegativeVarianceError(f"covariance at t={self.t} is not positive semidefinite")
        object.__setattr__(self, "P", P)

    def entry(self, i: int, j: int) -> float:
        return float(self.P[i, j])

    def is_psd(self) -> bool:
        return is_symmetric_psd(self.P)
