import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import InvalidInputError, InvalidParameterError
from app.models import (
    GbmParams,
    LinearSde,
    LmrGwParams,
    ModelKind,
    OuParams,
    SchwartzParams,
)
from app.services.lyapunov import lyapunov_numerical, output_variance, schwartz_variance
from app.services.model_catalog import (
    build_params,
    gbm_to_sde,
    gbm_variance,
    lmrgw_to_sde,
    ou_to_sde,
    ou_variance,
    schwartz_to_sde,
    to_sde,
)


# ==================== Pruebas de Parámetros ====================

def test_build_params_by_alias():
    """`lambda` es el nombre externo de lambda_"""
    params = build_params("lmrgw", {"lambda": 2.0, "sigma1": 0.5, "sigma2": 0.2})
    assert isinstance(params, LmrGwParams)
    assert params.lambda_ == 2.0
    assert params.calibrated_values() == {"lambda": 2.0, "sigma1": 0.5, "sigma2": 0.2}


@pytest.mark.parametrize(
    "kind, mapping",
    [
        ("lmrgw", {"lambda": 0.0, "sigma1": 0.5, "sigma2": 0.2}),
        ("lmrgw", {"lambda": 1.0, "sigma1": 0.0, "sigma2": 0.0}),
        ("lmrgw", {"lambda": 1.0, "sigma1": -0.1, "sigma2": 0.2}),
        ("schwartz", {"k": 1.0, "sigma_chi": 0.3, "sigma_xi": 0.1, "rho": 1.5}),
        ("ou", {"lambda": 1.0, "sigma": float("nan")}),
        ("gbm", {"sigma": 0.3, "unknown": 1.0}),
    ],
)
def test_build_params_rejects_invalid(kind, mapping):
    """Violaciones de invariantes se reportan como InvalidParameterError"""
    with pytest.raises(InvalidParameterError):
        build_params(kind, mapping)


def test_build_params_unknown_model():
    """Modelo desconocido"""
    with pytest.raises(InvalidParameterError):
        build_params("heston", {})


def test_params_are_frozen(lmrgw_params):
    """Los parámetros son inmutables"""
    with pytest.raises(ValidationError):
        lmrgw_params.sigma1 = 1.0


def test_vector_round_trip(schwartz_params):
    """with_vector(to_vector()) reproduce los parámetros"""
    again = schwartz_params.with_vector(schwartz_params.to_vector())
    for name in schwartz_params.calibrated_fields:
        assert getattr(again, name) == pytest.approx(getattr(schwartz_params, name), rel=1e-14)


def test_with_vector_keeps_drift():
    """El vector del optimizador no toca la deriva"""
    params = LmrGwParams(lambda_=1.0, sigma1=0.4, sigma2=0.1, mu=0.05)
    moved = params.with_vector(np.log([3.0, 0.2, 0.3]))
    assert moved.mu == 0.05
    assert moved.lambda_ == pytest.approx(3.0)


# ==================== Pruebas de Forma de Estado ====================

def test_lmrgw_to_sde_matrices(lmrgw_params):
    """Matrices A, B, C de LMR-GW"""
    sde = lmrgw_to_sde(lmrgw_params)
    np.testing.assert_array_equal(sde.A, [[-2.0, 2.0], [0.0, 0.0]])
    np.testing.assert_array_equal(sde.B, np.diag([0.5, 0.2]))
    np.testing.assert_array_equal(sde.S, np.eye(2))
    np.testing.assert_array_equal(sde.C, [1.0, 0.0])
    np.testing.assert_array_equal(sde.P0, np.zeros((2, 2)))


def test_lmrgw_degenerate_diffusion():
    """sigma2 = 0: BSB^T de rango 1"""
    sde = lmrgw_to_sde(LmrGwParams(lambda_=1.0, sigma1=0.5, sigma2=0.0))
    assert np.linalg.matrix_rank(sde.noise_covariance) == 1


def test_schwartz_to_sde_matrices(schwartz_params):
    """Matrices de Schwartz con correlación"""
    sde = schwartz_to_sde(schwartz_params)
    np.testing.assert_array_equal(sde.A, [[-1.5, 0.0], [0.0, 0.0]])
    np.testing.assert_array_equal(sde.B, np.diag([0.3, 0.15]))
    np.testing.assert_array_equal(sde.C, [1.0, 1.0])
    np.testing.assert_array_equal(sde.S, [[1.0, 0.3], [0.3, 1.0]])


def test_schwartz_uncorrelated_identity():
    """rho = 0: S es la identidad"""
    sde = schwartz_to_sde(SchwartzParams(k=1.0, sigma_chi=0.3, sigma_xi=0.1, rho=0.0))
    np.testing.assert_array_equal(sde.S, np.eye(2))


def test_gbm_and_ou_sde():
    """Sistemas escalares GBM y OU"""
    gbm = gbm_to_sde(GbmParams(sigma=0.3))
    assert gbm.order == 1
    assert gbm.noise_covariance[0, 0] == pytest.approx(0.09)
    ou = ou_to_sde(OuParams(lambda_=2.0, sigma=0.5), P0_11=0.05)
    np.testing.assert_array_equal(ou.A, [[-2.0]])
    np.testing.assert_array_equal(ou.P0, [[0.05]])


def test_to_sde_dispatch(lmrgw_params, schwartz_params):
    """to_sde elige la representación por tipo"""
    assert to_sde(lmrgw_params).C.tolist() == [1.0, 0.0]
    assert to_sde(schwartz_params).C.tolist() == [1.0, 1.0]
    assert to_sde(GbmParams(sigma=0.2)).order == 1


def test_linear_sde_rejects_bad_correlation():
    """S debe tener diagonal unitaria"""
    with pytest.raises(InvalidInputError):
        LinearSde(A=np.zeros((2, 2)), B=np.eye(2), C=[1.0, 0.0], S=2 * np.eye(2),
                  x0_mean=np.zeros(2), P0=np.zeros((2, 2)))


def test_linear_sde_rejects_indefinite_p0():
    """P0 indefinida"""
    with pytest.raises(InvalidInputError):
        LinearSde(A=np.zeros((2, 2)), B=np.eye(2), C=[1.0, 0.0], S=np.eye(2),
                  x0_mean=np.zeros(2), P0=[[1.0, 2.0], [2.0, 1.0]])


def test_linear_sde_dimension_mismatch():
    """Dimensiones incompatibles"""
    with pytest.raises(InvalidInputError):
        LinearSde(A=np.zeros((2, 2)), B=np.eye(3), C=[1.0, 0.0], S=np.eye(3),
                  x0_mean=np.zeros(2), P0=np.zeros((2, 2)))


def test_linear_sde_is_immutable(lmrgw_params):
    """Las matrices del sistema son de solo lectura"""
    sde = lmrgw_to_sde(lmrgw_params)
    with pytest.raises(ValueError):
        sde.A[0, 0] = 1.0


# ==================== Pruebas de Varianzas de un Factor ====================

def test_gbm_variance():
    """sigma^2 t"""
    assert gbm_variance(GbmParams(sigma=0.3), 4.0) == pytest.approx(0.36)


def test_ou_variance_initial_condition():
    """OU con varianza inicial"""
    assert ou_variance(OuParams(lambda_=2.0, sigma=0.5), 0.05, 0.0) == pytest.approx(0.05)


def test_ou_variance_asymptote():
    """sigma^2 / (2 lambda) para t grande"""
    assert ou_variance(OuParams(lambda_=2.0, sigma=0.5), 0.0, 50.0) == pytest.approx(0.0625)


@pytest.mark.parametrize("fn", [
    lambda: gbm_variance(GbmParams(sigma=0.3), -1.0),
    lambda: ou_variance(OuParams(lambda_=1.0, sigma=0.3), 0.0, -0.5),
])
def test_negative_time_rejected(fn):
    """Instante negativo en las fórmulas escalares"""
    with pytest.raises(InvalidInputError):
        fn()


# ==================== Pruebas Cruzadas con el Solver ====================

def test_schwartz_sde_matches_closed_form():
    """Varianza de salida del sistema = forma cerrada, 20 sorteos"""
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = SchwartzParams(
            k=float(rng.uniform(0.1, 5.0)),
            sigma_chi=float(rng.uniform(0.01, 1.0)),
            sigma_xi=float(rng.uniform(0.01, 1.0)),
            rho=float(rng.uniform(-1.0, 1.0)),
        )
        t = float(rng.uniform(0.01, 5.0))
        sde = schwartz_to_sde(p)
        numerical = output_variance(sde, lyapunov_numerical(sde, t))
        assert numerical == pytest.approx(schwartz_variance(p, t), rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("rho", [-1.0, 1.0])
def test_schwartz_perfect_correlation_psd(rho):
    """rho = +-1 sigue dando covarianzas semidefinidas"""
    sde = schwartz_to_sde(SchwartzParams(k=1.0, sigma_chi=0.4, sigma_xi=0.4, rho=rho))
    for t in np.linspace(0.01, 5.0, 20):
        P = lyapunov_numerical(sde, float(t)).P
        assert np.linalg.eigvalsh(P).min() >= -1e-12


def test_model_kind_values():
    """Nombres de los modelos"""
    assert [k.value for k in ModelKind] == ["gbm", "ou", "lmrgw", "schwartz"]
