import numpy as np
import pytest

from synchrocal.errors import RankDeficient, TooFewSnapshots
from synchrocal.line_estimator import (
    LABELS,
    assemble_regression,
    estimate_line,
    extract_sequence,
    pack_line,
    pack_unknowns,
    reference_bounds,
    sequence_values,
    unpack_unknowns,
)
from synchrocal.phasors import LineParameters
from synchrocal.refdb import expand_reference
from synchrocal.simulator import default_line, make_line_scenario, simulate_line

from conftest import relative_error


def test_pack_unpack_round_trip():
    p = default_line()
    x = pack_line(p)
    assert x.size == len(LABELS) == 30
    z, g, b = unpack_unknowns(x)
    assert np.allclose(z, p.z_abc) and np.allclose(b, p.b_abc) and np.allclose(g, p.z_abc @ p.b_abc)
    assert np.allclose(pack_unknowns(z, g, b), x)


def test_truth_satisfies_regression_exactly(clean_line):
    params, snaps = clean_line
    system = assemble_regression(snaps)
    assert system.shape == (12 * len(snaps), 30)
    r = system.H @ pack_line(params) - system.Z
    assert np.linalg.norm(r) < 1e-12


def test_noiseless_round_trip(clean_line, line_ref):
    params, snaps = clean_line
    est = estimate_line(snaps, line_ref, 0.30)
    assert np.max(relative_error(est.x, pack_line(params))) < 1e-6
    assert est.consistency < 1e-6
    assert est.snapshots_used == len(snaps)
    assert est.active_bounds == ()


def test_sequence_extraction_of_balanced_line():
    z1, z0, b1, b0 = extract_sequence(default_line())
    assert z1 == pytest.approx(0.01 + 0.10j)
    assert z0 == pytest.approx(0.03 + 0.30j)
    assert b1 == pytest.approx(0.20) and b0 == pytest.approx(0.12)
    seq = sequence_values(default_line())
    assert seq["r1"] == pytest.approx(0.01) and seq["x0"] == pytest.approx(0.30)


def test_reference_bounds_contain_reference(line_ref):
    ref = expand_reference(line_ref)
    bounds = reference_bounds(ref, 0.3)
    x = pack_line(ref)
    assert np.all(bounds.lb <= x) and np.all(x <= bounds.ub)
    assert np.all(bounds.lb <= bounds.ub)


def test_bounds_bind_when_truth_is_outside(line_ref):
    truth = expand_reference(type(line_ref)("t", 0.02, 0.10, 0.20, z0=0.06 + 0.3j, b0=0.12))
    _, snaps = simulate_line(make_line_scenario(truth, 10, seed=1))
    est = estimate_line(snaps, line_ref, 0.30)
    bounds = reference_bounds(expand_reference(line_ref), 0.30)
    assert np.all(est.x >= bounds.lb - 1e-12) and np.all(est.x <= bounds.ub + 1e-12)
    assert "R_a" in est.active_bounds


def test_too_few_snapshots(clean_line, line_ref):
    with pytest.raises(TooFewSnapshots):
        estimate_line(clean_line[1][:2], line_ref)


def test_identical_snapshots_are_rank_deficient(clean_line, line_ref):
    with pytest.raises(RankDeficient):
        estimate_line([clean_line[1][0]] * 6, line_ref)


def test_snapshot_order_does_not_matter(clean_line, line_ref):
    _, snaps = clean_line
    a = estimate_line(snaps, line_ref).x
    b = estimate_line(snaps[::-1], line_ref).x
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)


def test_accepts_three_phase_reference(clean_line):
    params, snaps = clean_line
    est = estimate_line(snaps, params, 0.3)
    assert isinstance(est.params, LineParameters)
    assert np.max(relative_error(est.x, pack_line(params))) < 1e-6
