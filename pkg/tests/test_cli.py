import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from app.cli import app, manifest_path

runner = CliRunner()


def _run(*args: str):
    return runner.invoke(app, list(args))


# ==================== Pruebas de generate y price ====================

def test_generate_writes_chain_and_manifest(tmp_path):
    """generate escribe la cadena y su manifiesto"""
    output = tmp_path / "SYN_2024-03-01.csv"
    result = _run("generate", "-o", str(output), "--n-quotes", "40", "--maturities", "6", "--seed", "3")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(output)
    assert list(frame.columns) == [
        "quote_id", "option_type", "strike", "maturity_years", "underlying_price", "market_price",
    ]
    assert len(frame) == 40
    manifest = json.loads(manifest_path(output).read_text(encoding="utf-8"))
    assert manifest["subcommand"] == "generate"
    assert manifest["seed"] == 3


def test_generate_is_reproducible(tmp_path):
    """Misma semilla, mismos bytes"""
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (first, second):
        result = _run("generate", "-o", str(path), "--n-quotes", "30", "--noise-sd", "0.1", "--seed", "9")
        assert result.exit_code == 0, result.output
    assert first.read_bytes() == second.read_bytes()


def test_price_methods_agree(fixtures_dir, tmp_path):
    """price con ambos métodos"""
    analytical, numerical = tmp_path / "analytical.csv", tmp_path / "numerical.csv"
    source = str(fixtures_dir / "chain_small.csv")
    assert _run("price", "-i", source, "-o", str(analytical)).exit_code == 0
    assert _run("price", "-i", source, "-o", str(numerical), "--method", "numerical").exit_code == 0
    a = pd.read_csv(analytical)["model_price"]
    b = pd.read_csv(numerical)["model_price"]
    assert len(a) == 5
    assert (abs(a - b) <= 1e-10 * a.abs().clip(lower=1.0)).all()
    assert manifest_path(analytical).exists()


def test_price_to_stdout(fixtures_dir):
    """Sin -o el CSV sale por stdout"""
    result = _run(
        "--log-level", "WARNING",
        "price", "-i", str(fixtures_dir / "chain_small.csv"), "--model", "gbm", "-p", "sigma=0.25",
    )
    assert result.exit_code == 0
    assert "model_price" in result.stdout.splitlines()[0]


# ==================== Pruebas de Códigos de Salida ====================

def test_missing_header_exits_2(fixtures_dir, tmp_path):
    """Cabecera ausente: código de salida 2"""
    result = _run("price", "-i", str(fixtures_dir / "chain_no_header.csv"), "-o", str(tmp_path / "out.csv"))
    assert result.exit_code == 2


def test_bad_rows_exit_2_unless_allowed(fixtures_dir, tmp_path):
    """Filas inválidas: código 2 salvo con --allow-bad-rows"""
    source = str(fixtures_dir / "chain_bad_rows.csv")
    assert _run("price", "-i", source, "-o", str(tmp_path / "strict.csv")).exit_code == 2
    result = _run("price", "-i", source, "-o", str(tmp_path / "lenient.csv"), "--allow-bad-rows")
    assert result.exit_code == 0
    assert len(pd.read_csv(tmp_path / "lenient.csv")) == 1


def test_missing_input_exits_2(tmp_path):
    """Archivo inexistente: código 2"""
    assert _run("price", "-i", str(tmp_path / "missing.csv")).exit_code == 2


@pytest.mark.parametrize("param", ["lambda=-1", "sigma1=abc", "lambda"])
def test_invalid_params_exit_2(fixtures_dir, param):
    """Parámetros inválidos: código 2"""
    result = _run("price", "-i", str(fixtures_dir / "chain_small.csv"), "-p", param)
    assert result.exit_code == 2


def test_calibrate_train_fraction_out_of_range(fixtures_dir, tmp_path):
    """--train-fraction fuera de (0, 1]"""
    result = _run(
        "calibrate", "-i", str(fixtures_dir / "chain_small.csv"),
        "-o", str(tmp_path / "fit.json"), "--train-fraction", "1.5",
    )
    assert result.exit_code == 2


# ==================== Pruebas de calibrate ====================

@pytest.fixture
def generated_chain(tmp_path):
    path = tmp_path / "GEN_2024-01-02.csv"
    result = _run(
        "generate", "-o", str(path), "--n-quotes", "60", "--maturities", "6",
        "--noise-sd", "0.05", "--seed", "1",
    )
    assert result.exit_code == 0, result.output
    return path


def _calibrate(chain, output, *extra: str):
    return _run(
        "calibrate", "-i", str(chain), "-o", str(output),
        "--restarts", "1", "--max-iterations", "300", "--seed", "5", *extra,
    )


def test_calibrate_is_deterministic(generated_chain, tmp_path):
    """Dos corridas con la misma semilla dan el mismo JSON"""
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert _calibrate(generated_chain, first).exit_code == 0
    assert _calibrate(generated_chain, second).exit_code == 0
    assert first.read_bytes() == second.read_bytes()

    result = json.loads(first.read_text(encoding="utf-8"))
    assert set(result["parameters"]) == {"lambda", "sigma1", "sigma2"}
    assert result["n_train"] == 42 and result["n_test"] == 18
    assert manifest_path(first).exists()
    assert (tmp_path / "first.surface.csv").exists()


def test_calibrate_full_train_fraction(generated_chain, tmp_path):
    """Fracción 1: sin cotizaciones de prueba"""
    output = tmp_path / "all.json"
    result = _calibrate(generated_chain, output, "--train-fraction", "1.0", "--no-surface")
    assert result.exit_code == 0, result.output
    payload = json.loads(output.read_text(encoding="utf-8"))
    assert payload["n_test"] == 0
    assert payload["test_rmse"] is None
    assert not (tmp_path / "all.surface.csv").exists()


def test_calibrate_underdetermined_exits_2(tmp_path):
    """Problema subdeterminado: código 2"""
    chain = tmp_path / "one.csv"
    chain.write_text(
        "quote_id,option_type,strike,maturity_years,underlying_price,market_price\n"
        "A,call,50.0,0.5,50.0,3.0\n",
        encoding="utf-8",
    )
    assert _calibrate(chain, tmp_path / "fit.json").exit_code == 2


def _two_days(tmp_path):
    paths = [tmp_path / "EEX_2024-01-02.csv", tmp_path / "EEX_2024-01-03.csv"]
    for seed, path in enumerate(paths):
        result = _run("generate", "-o", str(path), "--n-quotes", "30", "--maturities", "4", "--seed", str(seed))
        assert result.exit_code == 0, result.output
    return paths


def test_calibrate_one_fit_per_chain(tmp_path):
    """Un resultado por cadena"""
    paths = _two_days(tmp_path)
    output = tmp_path / "fit.json"
    result = _run(
        "calibrate", "-i", str(paths[0]), "-i", str(paths[1]), "-o", str(output),
        "--restarts", "1", "--no-surface",
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "fit.EEX_2024-01-02.json").exists()
    assert (tmp_path / "fit.EEX_2024-01-03.json").exists()
    assert manifest_path(output).exists()


def test_calibrate_pooled_by_underlying(tmp_path):
    """Un resultado por subyacente con ids prefijados"""
    paths = _two_days(tmp_path)
    output = tmp_path / "pooled.json"
    result = _run(
        "calibrate", "-i", str(paths[0]), "-i", str(paths[1]), "-o", str(output),
        "--restarts", "1", "--no-surface", "--group-by", "underlying",
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(output.read_text(encoding="utf-8"))
    assert len(payload["per_quote_fit"]) == 60
    assert payload["per_quote_fit"][0]["quote_id"].startswith("EEX_2024-01-02:")


def test_calibrate_rejects_repeated_file_names(tmp_path):
    """Dos archivos con el mismo nombre en carpetas distintas: código de salida 2"""
    first, second = tmp_path / "a" / "EEX_2024-01-02.csv", tmp_path / "b" / "EEX_2024-01-02.csv"
    for seed, path in enumerate((first, second)):
        path.parent.mkdir()
        result = _run("generate", "-o", str(path), "--n-quotes", "30", "--maturities", "4", "--seed", str(seed))
        assert result.exit_code == 0, result.output
    output = tmp_path / "fit.json"
    result = _run(
        "calibrate", "-i", str(first), "-i", str(second), "-o", str(output), "--restarts", "1",
    )
    assert result.exit_code == 2
    assert not output.exists()


# ==================== Pruebas de bench ====================

def test_bench_variance_table_and_csv(tmp_path):
    """bench variance imprime la tabla y escribe el CSV"""
    output = tmp_path / "bench.csv"
    result = _run("bench", "variance", "--m", "1,10", "--repetitions", "2", "-o", str(output))
    assert result.exit_code == 0, result.output
    assert "Speedup" in result.stdout
    assert output.read_text(encoding="utf-8").splitlines()[0] == "evaluations,analytical_s,numerical_s,speedup"
    assert manifest_path(output).exists()


def test_bench_variance_rejects_bad_m():
    """--m no numérico"""
    assert _run("bench", "variance", "--m", "1,x").exit_code == 2
