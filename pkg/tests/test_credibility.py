import numpy as np
import pytest

from synchrocal.credibility import (
    STATUS_FLAGGED,
    STATUS_OK,
    BootstrapDistribution,
    ScreeningConfig,
    bootstrap,
    credibility_metric,
    line_estimator,
    line_reference_values,
    screen,
)
from synchrocal.errors import NumericalError, TooManyFailedResamples, ZeroReference
from synchrocal.gen_estimator import GeneratorParameters
from synchrocal.refdb import LineReference, PersistenceState, expand_reference
from synchrocal.simulator import GenScenario, make_line_scenario, simulate_gen, simulate_line, step_input


def mean_estimator(xs):
    return {"mean": float(np.mean(xs))}


def test_bootstrap_mean_std_matches_theory():
    x = np.random.default_rng(0).normal(size=200)
    (d,) = bootstrap(list(x), mean_estimator, 2000, rng_seed=1)
    assert d.mean == pytest.approx(x.mean(), abs=0.01)
    assert d.std_dev == pytest.approx(x.std() / np.sqrt(len(x)), rel=0.1)


def test_bootstrap_deterministic_and_parallel_equal():
    x = list(np.arange(30.0))
    a = bootstrap(x, mean_estimator, 50, 3, workers=1)
    b = bootstrap(x, mean_estimator, 50, 3, workers=4)
    assert np.array_equal(a[0].samples, b[0].samples)


def test_bootstrap_constant_data_has_zero_spread():
    (d,) = bootstrap([2.0] * 10, mean_estimator, 20)
    assert d.std_dev == 0.0


def test_failed_resamples_redrawn_then_give_up():
    calls = {"n": 0}

    def flaky(xs):
        calls["n"] += 1
        if calls["n"] % 3 == 0:
            raise NumericalError("boom")
        return mean_estimator(xs)

    dists = bootstrap(list(range(10)), flaky, 30)
    assert dists[0].samples.size == 30

    def broken(xs):
        raise NumericalError("always")

    with pytest.raises(TooManyFailedResamples):
        bootstrap(list(range(10)), broken, 10)


def test_metric_and_zero_reference():
    d = BootstrapDistribution("r1", np.array([1.0, 1.1, 0.9]))
    c = credibility_metric(d, 2.0, 0.06)
    assert c.metric == pytest.approx(0.05)
    assert c.credible
    assert not credibility_metric(d, 2.0, 0.04).credible
    with pytest.raises(ZeroReference):
        credibility_metric(d, 0.0, 0.05)


REF = LineReference("L1", 0.01, 0.10, 0.20, z0=0.03 + 0.3j, b0=0.12)


def line_window(r_factor=1.0, n=20, seed=0, noise=(0.0, 0.0)):
    truth = expand_reference(LineReference("t", 0.01 * r_factor, 0.1, 0.2, z0=complex(0.03 * r_factor, 0.3), b0=0.12))
    return simulate_line(make_line_scenario(truth, n, seed=seed, noise=noise))[1]


def test_noiseless_metrics_are_tiny():
    snaps = line_window()
    refs = line_reference_values(REF)
    dists = bootstrap(snaps, line_estimator(REF, 0.3, list(refs)), 30, 0)
    for d in dists:
        assert credibility_metric(d, refs[d.parameter_label], 0.05).metric < 1e-9


def test_screen_self_consistent_has_no_flags():
    out = screen(line_window(noise=(1e-4, 1e-4)), REF, ScreeningConfig(resample_count=30))
    assert out.status == STATUS_OK
    assert not any(d.flagged for d in out.discrepancies.values())


def test_screen_flags_resistance_and_persists():
    state = PersistenceState(5)
    cfg = ScreeningConfig(resample_count=30, persistence_m=2)
    snaps = line_window(0.8, noise=(1e-4, 1e-4))
    first = screen(snaps, REF, cfg, state, "w1")
    assert first.discrepancies["r1"].flagged
    assert not first.discrepancies["x1"].flagged and not first.discrepancies["b1"].flagged
    assert first.consistent == ()
    second = screen(snaps, REF, cfg, state, "w2")
    assert "r1" in second.consistent and second.status == STATUS_FLAGGED
    assert second.recommend_calibration
    for o in (first, second):
        for k, d in o.discrepancies.items():
            assert not d.flagged or o.report.entries[k].credible


def test_non_credible_estimates_are_never_flagged():
    cfg = ScreeningConfig(epsilon=1e-12, resample_count=20)
    out = screen(line_window(0.8, noise=(1e-3, 1e-3)), REF, cfg)
    assert not any(d.flagged for d in out.discrepancies.values())
    assert out.status == "not credible, screening skipped"


def test_generator_screening(gen_ref):
    series = simulate_gen(GenScenario(GeneratorParameters(4.0, 0.3, 1.0, 0.05), 0.02, step_input(600), 0.0, 0))
    out = screen(series, gen_ref, ScreeningConfig(resample_count=20))
    assert out.status == STATUS_OK
    assert out.report.entries["inertia_h"].estimate == pytest.approx(4.0, rel=1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        ScreeningConfig(persistence_m=6, persistence_n=5)
    with pytest.raises(ValueError):
        ScreeningConfig(epsilon=0)
