"""Línea de comandos: price, calibrate, bench y generate.

Códigos de salida: 0 éxito, 1 error de cómputo, 2 error de entrada.
Cada salida escrita lleva al lado su manifiesto `<salida>.manifest.json`.
Ejecutar: python -m app.cli --help
"""
import logging
from collections import defaultdict
from contextlib import contextmanager
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from app.config import settings
from app.exceptions import AppError, DataIOError, FormatError, InvalidInputError, InvalidParameterError
from app.logging_config import configure_logging
from app.models import (
    CalibrationConfig,
    CalibrationResult,
    ModelKind,
    OptionChainFile,
    RunManifest,
    VarianceMethod,
)
from app.services.bench import bench_calibration, bench_variance, render_table, write_report_csv
from app.services.calibration import calibrate, evaluate_fit
from app.services.data_io import (
    chain_frame,
    export_surface,
    generate_synthetic_chain,
    monthly_maturities,
    parse_chain,
    write_chain,
)
from app.services.model_catalog import build_params
from app.services.pricing import price_chain

logger = logging.getLogger(__name__)

app = typer.Typer(help="Varianza de Lyapunov, precios de Black y calibración de modelos de energía")
bench_app = typer.Typer(help="Tiempos analítico vs numérico")
app.add_typer(bench_app, name="bench")

console = Console()
err_console = Console(stderr=True)

DEFAULT_PARAMS: dict[ModelKind, dict[str, float]] = {
    ModelKind.GBM: {"sigma": 0.3},
    ModelKind.OU: {"lambda": 2.0, "sigma": 0.5},
    ModelKind.LMRGW: {"lambda": 2.0, "sigma1": 0.5, "sigma2": 0.2},
    ModelKind.SCHWARTZ: {"k": 1.5, "sigma_chi": 0.4, "sigma_xi": 0.2, "rho": 0.3},
}
DEFAULT_BENCH_M = "1,10,100,1000,10000"


class GroupBy(str, Enum):
    CHAIN = "chain"
    UNDERLYING = "underlying"


@contextmanager
def _exit_on_error():
    try:
        yield
    except AppError as exc:
        err_console.print(f"error: {exc.message}", style="red", markup=False)
        for line in exc.diagnostics:
            err_console.print(f"  {line}", markup=False)
        raise typer.Exit(code=exc.exit_code)
    except ValidationError as exc:
        err_console.print(f"error: {exc}", style="red", markup=False)
        raise typer.Exit(code=InvalidParameterError.exit_code)


def _parse_params(items: list[str]) -> dict[str, float]:
    """`--param clave=valor` repetible"""
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise InvalidParameterError(f"expected key=value, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise InvalidParameterError(f"parameter {key.strip()} is not a number: {value!r}") from exc
    return params


def _model_params(model: ModelKind, items: list[str]):
    mapping = dict(DEFAULT_PARAMS[model])
    mapping.update(_parse_params(items))
    return build_params(model, mapping)


def _load_chain(path: Path, allow_bad_rows: bool) -> OptionChainFile:
    chain = parse_chain(path)
    if chain.diagnostics and not allow_bad_rows:
        raise FormatError(f"{path}: {len(chain.diagnostics)} invalid rows", list(chain.diagnostics))
    return chain


def manifest_path(output: Path) -> Path:
    return output.with_name(output.name + ".manifest.json")


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def _write_manifest(output: Path, manifest: RunManifest) -> None:
    _write_text(manifest_path(output), manifest.model_dump_json(indent=2) + "\n")


@app.callback()
def main(
    log_level: str = typer.Option(settings.log_level, "--log-level", help="Nivel de logging"),
):
    configure_logging(log_level)


# ==================== price ====================
@app.command()
def price(
    input: Path = typer.Option(..., "--input", "-i", help="Cadena CSV"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="CSV de salida (stdout si se omite)"),
    model: ModelKind = typer.Option(ModelKind.LMRGW, "--model"),
    method: VarianceMethod = typer.Option(VarianceMethod.ANALYTICAL, "--method"),
    param: list[str] = typer.Option([], "--param", "-p", help="Parámetro del modelo, clave=valor"),
    allow_bad_rows: bool = typer.Option(False, "--allow-bad-rows", help="Omitir filas inválidas"),
):
    """Valorar una cadena con la varianza del modelo (columna model_price)"""
    with _exit_on_error():
        params = _model_params(model, param)
        chain = _load_chain(input, allow_bad_rows)
        prices = price_chain(chain.quotes, params, method)
        if output is None:
            typer.echo(chain_frame(chain, prices).to_csv(index=False, lineterminator="\n"), nl=False)
            return
        write_chain(chain, output, prices)
        _write_manifest(
            output,
            RunManifest(
                subcommand="price",
                inputs=[str(input)],
                output=str(output),
                model=model.value,
                method=method.value,
                overrides={"params": params.model_dump(by_alias=True)},
            ),
        )
        console.print(f"{len(prices)} precios escritos en {output}")


# ==================== calibrate ====================
def _group_quotes(chains: list[tuple[Path, OptionChainFile]], group_by: GroupBy):
    stems = [path.stem for path, _ in chains]
    repeated = sorted({s for s in stems if stems.count(s) > 1})
    if repeated:
        # el nombre del archivo identifica la salida y prefija los ids
        raise InvalidInputError(f"input files share a name: {', '.join(repeated)}")
    if group_by is GroupBy.CHAIN:
        return {path.stem: list(chain.quotes) for path, chain in chains}
    groups = defaultdict(list)
    for path, chain in chains:
        # los ids se repiten entre días: se prefijan con el nombre del archivo
        groups[chain.market_label].extend(
            q.model_copy(update={"id": f"{path.stem}:{q.id}"}) for q in chain.quotes
        )
    return dict(groups)


def _print_result(name: str, result: CalibrationResult) -> None:
    table = Table(title=f"{name}: {result.model.value} ({result.method.value})")
    table.add_column("parámetro")
    table.add_column("valor", justify="right")
    for key, value in result.parameters.items():
        table.add_row(key, f"{value:.6g}")
    table.add_row("pérdida", f"{result.final_loss:.3e}")
    table.add_row("RMSE train", f"{result.train_rmse:.6g}")
    table.add_row("RMSE test", "-" if result.test_rmse is None else f"{result.test_rmse:.6g}")
    table.add_row("convergió", str(result.converged))
    console.print(table)


@app.command("calibrate")
def calibrate_command(
    input: list[Path] = typer.Option(..., "--input", "-i", help="Cadenas CSV (repetible)"),
    output: Path = typer.Option(..., "--output", "-o", help="JSON del resultado"),
    model: ModelKind = typer.Option(ModelKind.LMRGW, "--model"),
    method: VarianceMethod = typer.Option(VarianceMethod.ANALYTICAL, "--method"),
    seed: int = typer.Option(settings.default_seed, "--seed"),
    train_fraction: float = typer.Option(settings.calibration_train_fraction, "--train-fraction"),
    restarts: int = typer.Option(settings.calibration_restarts, "--restarts"),
    max_iterations: int = typer.Option(settings.calibration_max_iterations, "--max-iterations"),
    group_by: GroupBy = typer.Option(GroupBy.CHAIN, "--group-by"),
    param: list[str] = typer.Option([], "--param", "-p", help="Punto inicial, clave=valor"),
    surface: bool = typer.Option(True, "--surface/--no-surface", help="Exportar superficie de volatilidad"),
    allow_bad_rows: bool = typer.Option(False, "--allow-bad-rows"),
):
    """Calibrar un modelo por cadena (o por subyacente) y exportar la superficie"""
    with _exit_on_error():
        if not 0 < train_fraction <= 1:
            raise InvalidInputError(f"--train-fraction must be in (0, 1], got {train_fraction}")
        if restarts < 1:
            raise InvalidInputError(f"--restarts must be at least 1, got {restarts}")
        guess = _parse_params(param) or None
        cfg = CalibrationConfig(
            method=method,
            initial_guess=guess,
            max_iterations=max_iterations,
            restarts=restarts,
            rng_seed=seed,
            train_fraction=train_fraction,
        )
        chains = [(path, _load_chain(path, allow_bad_rows)) for path in input]
        groups = _group_quotes(chains, group_by)

        written = []
        for name, quotes in sorted(groups.items()):
            target = output if len(groups) == 1 else output.with_name(f"{output.stem}.{name}{output.suffix}")
            result = calibrate(quotes, model, cfg)
            _write_text(target, result.model_dump_json(indent=2, by_alias=True) + "\n")
            written.append(str(target))
            if surface:
                report = evaluate_fit(result, sorted(quotes, key=lambda q: q.id))
                if report.surface:
                    surface_path = target.with_name(f"{target.stem}.surface.csv")
                    export_surface(report.surface, surface_path)
                    written.append(str(surface_path))
                else:
                    logger.warning("Sin puntos de superficie para %s", name)
            _print_result(name, result)

        _write_manifest(
            output,
            RunManifest(
                subcommand="calibrate",
                inputs=[str(p) for p in input],
                output=str(output),
                model=model.value,
                method=method.value,
                seed=seed,
                overrides={
                    "train_fraction": train_fraction,
                    "restarts": restarts,
                    "max_iterations": max_iterations,
                    "group_by": group_by.value,
                    "initial_guess": guess,
                    "files_written": written,
                },
            ),
        )


# ==================== bench ====================
def _parse_m_values(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"--m must be a comma-separated list of integers, got {text!r}") from exc
    if not values:
        raise InvalidInputError("--m must list at least one value")
    return values


@bench_app.command("variance")
def bench_variance_command(
    model: ModelKind = typer.Option(ModelKind.LMRGW, "--model"),
    param: list[str] = typer.Option([], "--param", "-p"),
    m: str = typer.Option(DEFAULT_BENCH_M, "--m", help="Valores de M separados por comas"),
    repetitions: int = typer.Option(settings.bench_repetitions, "--repetitions"),
    window_days: float = typer.Option(settings.bench_window_days, "--window-days"),
    batched: bool = typer.Option(False, "--batched", help="Una llamada vectorizada por método"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="CSV del informe"),
):
    """Tiempos de M evaluaciones de la varianza (tabla de speedup)"""
    with _exit_on_error():
        params = _model_params(model, param)
        m_values = _parse_m_values(m)
        report = bench_variance(params, m_values, repetitions, batched=batched, window_days=window_days)
        typer.echo(render_table(report), nl=False)
        if output is not None:
            write_report_csv(report, output)
            _write_manifest(
                output,
                RunManifest(
                    subcommand="bench variance",
                    output=str(output),
                    model=model.value,
                    overrides={
                        "params": params.model_dump(by_alias=True),
                        "m": m_values,
                        "repetitions": repetitions,
                        "window_days": window_days,
                        "batched": batched,
                    },
                ),
            )


@bench_app.command("calibration")
def bench_calibration_command(
    input: list[Path] = typer.Option(..., "--input", "-i"),
    model: ModelKind = typer.Option(ModelKind.LMRGW, "--model"),
    seed: int = typer.Option(settings.default_seed, "--seed"),
    restarts: int = typer.Option(settings.calibration_restarts, "--restarts"),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
    allow_bad_rows: bool = typer.Option(False, "--allow-bad-rows"),
):
    """Calibrar cada cadena con ambos métodos y comparar tiempos"""
    with _exit_on_error():
        chains = [_load_chain(path, allow_bad_rows) for path in input]
        cfg = CalibrationConfig(rng_seed=seed, restarts=restarts)
        report = bench_calibration(chains, model, cfg)
        typer.echo(render_table(report), nl=False)
        if output is not None:
            write_report_csv(report, output)
            _write_manifest(
                output,
                RunManifest(
                    subcommand="bench calibration",
                    inputs=[str(p) for p in input],
                    output=str(output),
                    model=model.value,
                    seed=seed,
                    overrides={"restarts": restarts},
                ),
            )
        if any(row.error for row in report.rows):
            raise typer.Exit(code=1)


# ==================== generate ====================
@app.command()
def generate(
    output: Path = typer.Option(..., "--output", "-o", help="CSV de la cadena"),
    model: ModelKind = typer.Option(ModelKind.LMRGW, "--model"),
    param: list[str] = typer.Option([], "--param", "-p"),
    n_quotes: int = typer.Option(500, "--n-quotes"),
    maturities: int = typer.Option(12, "--maturities", help="Número de vencimientos mensuales"),
    noise_sd: float = typer.Option(0.0, "--noise-sd", help="Desviación del ruido en unidades de precio"),
    seed: int = typer.Option(settings.default_seed, "--seed"),
    label: str = typer.Option("SYN", "--label"),
    trade_date: Optional[str] = typer.Option(None, "--trade-date", help="AAAA-MM-DD"),
    underlying_price: float = typer.Option(settings.synthetic_underlying_price, "--underlying-price"),
):
    """Generar una cadena sintética con precios del modelo"""
    with _exit_on_error():
        params = _model_params(model, param)
        try:
            day = date.fromisoformat(trade_date) if trade_date else None
        except ValueError as exc:
            raise InvalidInputError(f"--trade-date must be YYYY-MM-DD, got {trade_date!r}") from exc
        chain = generate_synthetic_chain(
            params,
            n_quotes=n_quotes,
            maturities=monthly_maturities(day, maturities),
            noise_sd=noise_sd,
            rng_seed=seed,
            underlying_price=underlying_price,
            market_label=label,
            trade_date=day,
        )
        write_chain(chain, output)
        _write_manifest(
            output,
            RunManifest(
                subcommand="generate",
                output=str(output),
                model=model.value,
                seed=seed,
                overrides={
                    "params": params.model_dump(by_alias=True),
                    "n_quotes": n_quotes,
                    "maturities": maturities,
                    "noise_sd": noise_sd,
                    "label": label,
                    "trade_date": trade_date,
                    "underlying_price": underlying_price,
                },
            ),
        )
        console.print(f"{len(chain.quotes)} cotizaciones escritas en {output}")


if __name__ == "__main__":
    app()
