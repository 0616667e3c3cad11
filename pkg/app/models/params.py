from enum import Enum
from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class ModelKind(str, Enum):
    GBM = "gbm"
    OU = "ou"
    LMRGW = "lmrgw"
    SCHWARTZ = "schwartz"


class VarianceMethod(str, Enum):
    ANALYTICAL = "analytical"
    NUMERICAL = "numerical"


class Transform(str, Enum):
    """Reparametrización usada por el optimizador"""
    LOG = "log"
    ATANH = "atanh"


class ModelParams(BaseModel):
    """Base de los conjuntos de parámetros de los modelos del catálogo.

    `calibrated_fields` enumera los parámetros libres en el orden del vector
    del optimizador; los demás (derivas, nivel) se conservan pero no afectan
    la varianza.
    """
    model_config = ConfigDict(
        frozen=True,
        populate_by_name=True,
        allow_inf_nan=False,
        extra="forbid",
    )

    kind: ClassVar[ModelKind]
    calibrated_fields: ClassVar[tuple[str, ...]]
    transforms: ClassVar[tuple[Transform, ...]]
    min_maturities: ClassVar[int] = 2

    def to_vector(self) -> np.ndarray:
        """Vector sin restricciones (log / atanh) para el optimizador"""
        values = []
        for name, transform in zip(self.calibrated_fields, self.transforms):
            value = getattr(self, name)
            if transform is Transform.LOG:
                values.append(np.log(value))
            else:
                values.append(np.arctanh(np.clip(value, -1 + 1e-12, 1 - 1e-12)))
        return np.array(values, dtype=float)

    def with_vector(self, theta: np.ndarray) -> "ModelParams":
        """Nuevo conjunto de parámetros a partir del vector del optimizador"""
        update = {}
        for name, transform, value in zip(self.calibrated_fields, self.transforms, theta):
            update[name] = float(np.exp(value) if transform is Transform.LOG else np.tanh(value))
        data = self.model_dump()
        data.update(update)
        return type(self).model_validate(data)

    def calibrated_values(self) -> dict[str, float]:
        return {
            type(self).model_fields[name].alias or name: float(getattr(self, name))
            for name in self.calibrated_fields
        }


class GbmParams(ModelParams):
    kind: ClassVar[ModelKind] = ModelKind.GBM
    calibrated_fields: ClassVar[tuple[str, ...]] = ("sigma",)
    transforms: ClassVar[tuple[Transform, ...]] = (Transform.LOG,)
    min_maturities: ClassVar[int] = 1

    sigma: float = Field(ge=0)


class OuParams(ModelParams):
    kind: ClassVar[ModelKind] = ModelKind.OU
    calibrated_fields: ClassVar[tuple[str, ...]] = ("lambda_", "sigma")
    transforms: ClassVar[tuple[Transform, ...]] = (Transform.LOG, Transform.LOG)

    lambda_: float = Field(alias="lambda", gt=0)
    sigma: float = Field(ge=0)
    level: float = 0.0


class LmrGwParams(ModelParams):
    """Modelo LMR-GW: Ornstein-Uhlenbeck que revierte a un Wiener generalizado"""
    kind: ClassVar[ModelKind] = ModelKind.LMRGW
    calibrated_fields: ClassVar[tuple[str, ...]] = ("lambda_", "sigma1", "sigma2")
    transforms: ClassVar[tuple[Transform, ...]] = (Transform.LOG,) * 3

    lambda_: float = Field(alias="lambda", gt=0)
    sigma1: float = Field(ge=0)
    sigma2: float = Field(ge=0)
    mu: float = 0.0

    @model_validator(mode="after")
    def _some_volatility(self):
        if self.sigma1 == 0 and self.sigma2 == 0:
            raise ValueError("at least one of sigma1, sigma2 must be positive")
        return self


class SchwartzParams(ModelParams):
    """Modelo de dos factores de Schwartz-Smith (corto plazo + equilibrio)"""
    kind: ClassVar[ModelKind] = ModelKind.SCHWARTZ
    calibrated_fields: ClassVar[tuple[str, ...]] = ("k", "sigma_chi", "sigma_xi", "rho")
    transforms: ClassVar[tuple[Transform, ...]] = (
        Transform.LOG, Transform.LOG, Transform.LOG, Transform.ATANH,
    )

    k: float = Field(gt=0)
    sigma_chi: float = Field(ge=0)
    sigma_xi: float = Field(ge=0)
    rho: float = Field(default=0.0, ge=-1, le=1)
    mu_xi: float = 0.0


PARAMS_BY_KIND: dict[ModelKind, type[ModelParams]] = {
    ModelKind.GBM: GbmParams,
    ModelKind.OU: OuParams,
    ModelKind.LMRGW: LmrGwParams,
    ModelKind.SCHWARTZ: SchwartzParams,
}
