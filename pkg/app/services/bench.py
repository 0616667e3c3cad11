"""Comparación de tiempos: varianza analítica frente al método de bloques.

Se mide con `time.perf_counter` en un solo hilo; las ejecuciones de
calentamiento no cuentan y se reporta la mediana de las repeticiones.
"""
import logging
import time
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from app.config import settings
from app.exceptions import AppError, DataIOError, InvalidInputError
from app.models import (
    BenchKind,
    BenchReport,
    BenchRow,
    CalibrationConfig,
    ModelKind,
    ModelParams,
    OptionChainFile,
    VarianceMethod,
)
from app.services.calibration import calibrate
from app.services.lyapunov import (
    analytical_output_variance,
    lyapunov_numerical,
    lyapunov_numerical_batch,
    output_variance,
    scalar_variance_function,
)
from app.services.model_catalog import to_sde

logger = logging.getLogger(__name__)

BASELINE_SHARE = 0.01
REPORT_COLUMNS = ("evaluations", "analytical_s", "numerical_s", "speedup")


def _median_time(run: Callable[[], object], repetitions: int, warmup: int) -> float:
    for _ in range(warmup):
        run()
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        run()
        samples.append(time.perf_counter() - start)
    return float(np.median(samples))


def _speedup(numerical_s: float, analytical_s: float) -> float:
    return numerical_s / analytical_s if analytical_s > 0 else float("inf")


def _relative_discrepancy(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(a), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b) / scale)) if a.size else 0.0


def _noop():
    return None


def evaluation_times(m: int, window_days: float) -> np.ndarray:
    """M instantes uniformes en (0, ventana], en años"""
    window = window_days / 365.0
    return np.linspace(window / m, window, m)


def bench_variance(
    model: ModelParams,
    m_values: Sequence[int],
    repetitions: Optional[int] = None,
    batched: bool = False,
    window_days: Optional[float] = None,
    warmup: Optional[int] = None,
    P0=None,
) -> BenchReport:
    """Tiempo de M evaluaciones de la varianza por cada método.

    En modo normal se hace una llamada por instante; con `batched` una sola
    llamada vectorizada por método.
    """
    repetitions = settings.bench_repetitions if repetitions is None else repetitions
    window_days = settings.bench_window_days if window_days is None else window_days
    warmup = settings.bench_warmup if warmup is None else warmup
    if not m_values:
        raise InvalidInputError("m_values must be nonempty")
    if any(m < 1 for m in m_values):
        raise InvalidInputError("every M must be at least 1")
    if repetitions < 1:
        raise InvalidInputError(f"repetitions must be at least 1, got {repetitions}")
    if window_days <= 0:
        raise InvalidInputError(f"window_days must be positive, got {window_days}")

    sde = to_sde(model, P0)
    analytical_point = scalar_variance_function(model, P0)
    # coste del propio arnés: perf_counter y una llamada vacía
    overhead_s = _median_time(_noop, repetitions, warmup)

    rows = []
    for m in m_values:
        times = evaluation_times(m, window_days)
        points = times.tolist()

        if batched:
            def analytical():
                return analytical_output_variance(model, times, P0)

            def numerical():
                covariances = lyapunov_numerical_batch(sde, times)
                return np.array([output_variance(sde, P) for P in covariances])
        else:
            def analytical():
                return [analytical_point(t) for t in points]

            def numerical():
                return [output_variance(sde, lyapunov_numerical(sde, t)) for t in points]

        analytical_s = _median_time(analytical, repetitions, warmup)
        numerical_s = _median_time(numerical, repetitions, warmup)
        row = BenchRow(
            label=str(m),
            evaluations=m,
            analytical_s=analytical_s,
            numerical_s=numerical_s,
            speedup=_speedup(numerical_s, analytical_s),
            reliable=overhead_s <= BASELINE_SHARE * analytical_s,
            max_relative_discrepancy=_relative_discrepancy(analytical(), numerical()),
        )
        if not row.reliable:
            logger.warning("M=%d: el coste del arnés de medida supera el 1%% del tiempo analítico", m)
        logger.info(
            "M=%d: analítico %.4g s, numérico %.4g s, speedup %.2f",
            m, analytical_s, numerical_s, row.speedup,
        )
        rows.append(row)

    return BenchReport(
        title=f"{model.kind.value} variance, {window_days:g}-day window",
        kind=BenchKind.VARIANCE,
        rows=rows,
        repetitions=repetitions,
        batched=batched,
    )


def _chain_label(chain: OptionChainFile) -> str:
    if chain.trade_date is None:
        return chain.market_label
    return f"{chain.market_label} {chain.trade_date.isoformat()}"


def bench_calibration(
    chains: Sequence[OptionChainFile],
    kind: ModelKind | str = ModelKind.LMRGW,
    cfg: Optional[CalibrationConfig] = None,
) -> BenchReport:
    """Calibrar cada cadena con ambos métodos (misma semilla) y comparar tiempos"""
    if not chains:
        raise InvalidInputError("bench_calibration needs at least one chain")
    kind = ModelKind(kind)
    cfg = cfg or CalibrationConfig()
    analytical_cfg = cfg.model_copy(update={"method": VarianceMethod.ANALYTICAL})
    numerical_cfg = cfg.model_copy(update={"method": VarianceMethod.NUMERICAL})

    rows = []
    for chain in chains:
        label = _chain_label(chain)
        try:
            start = time.perf_counter()
            fast = calibrate(chain.quotes, kind, analytical_cfg)
            analytical_s = time.perf_counter() - start
            start = time.perf_counter()
            slow = calibrate(chain.quotes, kind, numerical_cfg)
            numerical_s = time.perf_counter() - start
        except AppError as exc:
            logger.error("Calibración de %s fallida: %s", label, exc.message)
            rows.append(
                BenchRow(
                    label=label,
                    evaluations=len(chain.quotes),
                    analytical_s=0.0,
                    numerical_s=0.0,
                    speedup=0.0,
                    reliable=False,
                    error=exc.message,
                )
            )
            continue

        rows.append(
            BenchRow(
                label=label,
                evaluations=len(chain.quotes),
                analytical_s=analytical_s,
                numerical_s=numerical_s,
                speedup=_speedup(numerical_s, analytical_s),
                max_relative_discrepancy=_relative_discrepancy(
                    [r.fitted_price for r in fast.per_quote_fit],
                    [r.fitted_price for r in slow.per_quote_fit],
                ),
            )
        )
        logger.info("%s: analítico %.3f s, numérico %.3f s", label, analytical_s, numerical_s)

    finished = [r for r in rows if r.error is None]
    if finished:
        analytical_total = sum(r.analytical_s for r in finished)
        numerical_total = sum(r.numerical_s for r in finished)
        rows.append(
            BenchRow(
                label="total",
                evaluations=sum(r.evaluations for r in finished),
                analytical_s=analytical_total,
                numerical_s=numerical_total,
                speedup=_speedup(numerical_total, analytical_total),
                max_relative_discrepancy=max(r.max_relative_discrepancy for r in finished),
            )
        )

    return BenchReport(
        title=f"{kind.value} calibration, {len(chains)} chains",
        kind=BenchKind.CALIBRATION,
        rows=rows,
        repetitions=1,
        aggregation="total",
    )


# ==================== Salida ====================
def report_frame(report: BenchReport) -> pd.DataFrame:
    frame = pd.DataFrame(
        {
            "evaluations": [r.evaluations for r in report.rows],
            "analytical_s": [r.analytical_s for r in report.rows],
            "numerical_s": [r.numerical_s for r in report.rows],
            "speedup": [r.speedup for r in report.rows],
        }
    )
    if report.kind is BenchKind.CALIBRATION:
        frame.insert(0, "label", [r.label for r in report.rows])
        frame["max_relative_discrepancy"] = [r.max_relative_discrepancy for r in report.rows]
        frame["error"] = [r.error or "" for r in report.rows]
    return frame


def render_table(report: BenchReport) -> str:
    """Tabla de texto alineada: evaluaciones, segundos por método y speedup"""
    frame = report_frame(report).rename(
        columns={
            "evaluations": "M" if report.kind is BenchKind.VARIANCE else "Options",
            "analytical_s": "Analytical (s)",
            "numerical_s": "Numerical (s)",
            "speedup": "Speedup",
        }
    )
    flagged = [r.label for r in report.rows if not r.reliable and r.error is None]
    lines = [
        f"{report.title} ({report.aggregation} of {report.repetitions} runs"
        f"{', batched' if report.batched else ''})",
        frame.to_string(index=False, float_format=lambda v: f"{v:.4f}"),
    ]
    if flagged:
        lines.append(f"unreliable rows (timer overhead above 1%): {', '.join(flagged)}")
    return "\n".join(lines) + "\n"


def write_report_csv(report: BenchReport, path: str | Path) -> None:
    """CSV evaluations,analytical_s,numerical_s,speedup (más etiqueta en calibración)"""
    frame = report_frame(report)
    for column in ("analytical_s", "numerical_s", "speedup", "max_relative_discrepancy"):
        if column in frame:
            frame[column] = [
                "" if v is None or pd.isna(v) else repr(float(v)) for v in frame[column]
            ]
    try:
        frame.to_csv(Path(path), index=False, lineterminator="\n", encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
