import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synchrocal.errors import DegenerateCoefficients, RankDeficient, TooShort
from synchrocal.gen_estimator import (
    ArmaCoefficients,
    GeneratorParameters,
    GenTimeSeries,
    arma_from_params,
    arma_regression,
    estimate_generator,
    identify_arma,
    params_from_arma,
    steady_state_gain,
)
from synchrocal.simulator import GenScenario, simulate_gen, step_input

from conftest import relative_error

TRUE = GeneratorParameters(4.0, 0.3, 1.0, 0.05)
H = 0.02


@settings(max_examples=200)
@given(st.floats(0.5, 20), st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.01, 0.2), st.floats(0.005, 0.1))
def test_algebraic_round_trip(h_, t, kd, kr, step):
    p = GeneratorParameters(h_, t, kd, kr)
    back = params_from_arma(arma_from_params(p, step), step)
    assert np.max(relative_error(list(back.as_dict().values()), list(p.as_dict().values()))) < 1e-9


def test_arma_coefficients_known_values():
    c = arma_from_params(TRUE, H)
    assert c.a1 == -2.0
    assert c.b3 == pytest.approx(H / 8)
    assert c.b2 == pytest.approx(-(H * H + 0.3 * H) / 2.4)


def test_degenerate_coefficients():
    with pytest.raises(DegenerateCoefficients):
        params_from_arma(ArmaCoefficients(-2, 1, 0, 0, 0), H)
    with pytest.raises(DegenerateCoefficients):
        params_from_arma(ArmaCoefficients(-2, 1, 0, -0.01, 0.01), H)


def _series(n=1000, noise=0.0):
    return simulate_gen(GenScenario(TRUE, H, step_input(n), noise, 1))


def test_identification_noiseless():
    params, fit = estimate_generator(_series())
    truth = arma_from_params(TRUE, H)
    assert np.max(np.abs(fit.coefficients.as_array() - truth.as_array())) < 1e-6
    assert np.max(relative_error(list(params.as_dict().values()), list(TRUE.as_dict().values()))) < 1e-4


def test_step_response_steady_state():
    y = simulate_gen(GenScenario(TRUE, H, step_input(20000), 0.0, 0)).w_delta
    assert y[-1] == pytest.approx(0.1 * steady_state_gain(TRUE), abs=1e-6)
    assert steady_state_gain(TRUE) == pytest.approx(-1 / (1.0 + 1 / 0.05))


def test_regression_rows():
    s = _series(50)
    system = arma_regression(s)
    assert system.shape == (47, 5)
    # noiseless data sits exactly on the recursion
    c = arma_from_params(TRUE, H).as_array()
    assert np.max(np.abs(system.H @ c - system.Z)) < 1e-15


def test_noisy_identification_is_close():
    params, _ = estimate_generator(_series(5000, noise=1e-7))
    assert params.inertia_h == pytest.approx(4.0, rel=0.05)


def test_short_and_flat_series():
    with pytest.raises(TooShort):
        identify_arma(GenTimeSeries(H, np.zeros(5), np.zeros(5)))
    with pytest.raises(RankDeficient):
        identify_arma(GenTimeSeries(H, np.zeros(100), np.zeros(100)))


def test_parameter_validation():
    with pytest.raises(ValueError):
        GeneratorParameters(0.0, 1, 1, 1)
    with pytest.raises(ValueError):
        GenTimeSeries(H, np.zeros(3), np.zeros(4))
