from pydantic_settings import BaseSettings

from app import __version__


class Settings(BaseSettings):
    # Configuración de la Aplicación
    app_name: str = "Lyapunov Energy Pricer"
    app_version: str = __version__
    debug: bool = False
    log_level: str = "INFO"

    # Configuración de Precios (r = 0 por defecto)
    risk_free_rate: float = 0.0
    variance_floor: float = 1e-12

    # Configuración de Calibración
    calibration_max_iterations: int = 2000
    calibration_loss_tolerance: float = 1e-10
    calibration_restarts: int = 3
    calibration_train_fraction: float = 0.7
    default_seed: int = 0

    # Configuración de Benchmark
    bench_repetitions: int = 10
    bench_window_days: float = 30.0
    bench_warmup: int = 1

    # Cadenas sintéticas
    synthetic_underlying_price: float = 50.0

    class Config:
        env_file = ".env"
        case_sensitive = False


settings = Settings()
