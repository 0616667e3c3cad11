from .params import (
    ModelKind,
    VarianceMethod,
    ModelParams,
    GbmParams,
    OuParams,
    LmrGwParams,
    SchwartzParams,
    PARAMS_BY_KIND,
)
from .sde import LinearSde, StateCovariance
from .option import OptionKind, OptionQuote, OptionChainFile, PricingConfig
from .calibration import (
    CalibrationConfig,
    CalibrationResult,
    FitReport,
    QuoteFit,
    QuoteSubset,
    SurfacePoint,
)
from .bench import BenchKind, BenchReport, BenchRow
from .manifest import RunManifest

__all__ = [
    "ModelKind",
    "VarianceMethod",
    "ModelParams",
    "GbmParams",
    "OuParams",
    "LmrGwParams",
    "SchwartzParams",
    "PARAMS_BY_KIND",
    "LinearSde",
    "StateCovariance",
    "OptionKind",
    "OptionQuote",
    "OptionChainFile",
    "PricingConfig",
    "CalibrationConfig",
    "CalibrationResult",
    "FitReport",
    "QuoteFit",
    "QuoteSubset",
    "SurfacePoint",
    "BenchKind",
    "BenchReport",
    "BenchRow",
    "RunManifest",
]
