"""Localize systematic PMU channel errors and the true line parameters.

For a candidate positive-sequence line (R, X, B) the seven free channel
biases (magnitudes of V_S, V_R, I_S, I_R and angles of V_R, I_S, I_R;
the V_S angle is the reference and fixed at 0) are fitted by linearizing
the positive-sequence line equations around zero bias. Scanning candidates
over a box of ±alpha around the EMS reference and clustering each
candidate's seven biases with DBSCAN singles out the candidate whose
unbiased channels collapse onto one tight cluster; the channels left
outside that cluster are the biased ones.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dbscan import DbscanConfig, cluster
from .errors import NoCandidates
from .numerics import RegressionSystem, solve_least_squares
from .phasors import CHANNELS, BiasVector, MeasurementSnapshot, positive_sequence, stack_channels

CLUSTER_CHANNELS = ("d_vs", "d_vr", "d_is", "d_ir", "d_th_vr", "d_th_is", "d_th_ir")
ALL_CHANNELS = ("d_vs", "d_vr", "d_is", "d_ir", "d_th_vs", "d_th_vr", "d_th_is", "d_th_ir")
FD_STEP = 1e-6
DEFAULT_EPS_LADDER = tuple(np.logspace(-5, -2, 10))


@dataclass(frozen=True)
class ScanConfig:
    alpha: float = 0.10
    points_per_axis: tuple[int, int, int] = (41, 41, 41)
    dbscan_eps_ladder: tuple[float, ...] = DEFAULT_EPS_LADDER
    min_pts: int = 3

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if len(self.points_per_axis) != 3 or any(int(n) < 1 for n in self.points_per_axis):
            raise ValueError("points_per_axis needs three counts >= 1")
        ladder = tuple(float(e) for e in self.dbscan_eps_ladder)
        if not ladder or any(e <= 0 for e in ladder):
            raise ValueError("eps ladder must hold positive distances")
        object.__setattr__(self, "points_per_axis", tuple(int(n) for n in self.points_per_axis))
        object.__setattr__(self, "dbscan_eps_ladder", tuple(sorted(ladder)))


@dataclass(frozen=True)
class PositiveSequenceData:
    """Positive-sequence phasors of every snapshot, one complex array per channel."""

    vs: np.ndarray
    vr: np.ndarray
    is_: np.ndarray
    ir: np.ndarray

    @classmethod
    def from_snapshots(cls, snapshots: Sequence[MeasurementSnapshot]) -> "PositiveSequenceData":
        ch = stack_channels(snapshots)
        return cls(*(positive_sequence(ch[c]) for c in CHANNELS))

    def channels(self) -> tuple[np.ndarray, ...]:
        return self.vs, self.vr, self.is_, self.ir

    def __len__(self) -> int:
        return self.vs.size


@dataclass(frozen=True)
class CandidateSolution:
    candidate: tuple[float, float, float]
    biases: np.ndarray
    fit_residual: float

    def bias_vector(self) -> BiasVector:
        return bias_vector_from(self.biases)


@dataclass(frozen=True)
class CalibrationResult:
    candidate: tuple[float, float, float]
    candidate_index: int
    bias: BiasVector
    cluster_channels: tuple[str, ...]
    outlier_channels: dict[str, float]
    winning_eps: float
    cluster_spread: float
    fit_residual: float
    cluster_sizes: tuple[int, ...] = field(default=())


def bias_vector_from(biases7) -> BiasVector:
    b = dict(zip(CLUSTER_CHANNELS, map(float, biases7)))
    b["d_th_vs"] = 0.0
    return BiasVector(**b)


def _corrected(data: PositiveSequenceData, b: np.ndarray) -> tuple[np.ndarray, ...]:
    """Apply true = (V + dV)∠(θ + dθ) to each channel; ``b`` is the 8-vector."""
    out = []
    for k, m in enumerate(data.channels()):
        out.append((np.abs(m) + b[k]) * np.exp(1j * (np.angle(m) + b[4 + k])))
    return tuple(out)


def _equations(candidate, vs, vr, i_s, i_r) -> tuple[np.ndarray, np.ndarray]:
    R, X, B = candidate
    z = complex(R, X)
    r1 = vs - vr - z * i_s + 0.5j * z * B * vs
    r2 = i_s + i_r - 0.5j * B * (vs + vr)
    return r1, r2


def _stack(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    return np.column_stack([r1.real, r1.imag, r2.real, r2.imag]).reshape(-1)


def residual(candidate, phasors: Sequence[complex], bias: BiasVector = BiasVector()) -> np.ndarray:
    """(Re r1, Im r1, Re r2, Im r2) for one snapshot's positive-sequence phasors.

    ``phasors`` are the measured (V_S, V_R, I_S, I_R); they are corrected by
    ``bias`` before the line equations are evaluated.
    """
    data = PositiveSequenceData(*(np.atleast_1d(np.asarray(p, dtype=complex)) for p in phasors))
    return _stack(*_equations(candidate, *_corrected(data, np.array(bias.as_tuple()))))


def stacked_residual(data: PositiveSequenceData, candidate, biases7) -> np.ndarray:
    b8 = np.insert(np.asarray(biases7, dtype=float), 4, 0.0)
    return _stack(*_equations(candidate, *_corrected(data, b8)))


def sensitivity_matrix(data: PositiveSequenceData, candidate, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of the stacked residual w.r.t. the 7 biases at zero."""
    S = np.empty((4 * len(data), len(CLUSTER_CHANNELS)))
    for j in range(len(CLUSTER_CHANNELS)):
        e = np.zeros(len(CLUSTER_CHANNELS))
        e[j] = step
        S[:, j] = (stacked_residual(data, candidate, e) - stacked_residual(data, candidate, -e)) / (2 * step)
    return S


def analytic_sensitivity(data: PositiveSequenceData, candidate) -> np.ndarray:
    """Closed-form counterpart of :func:`sensitivity_matrix`."""
    R, X, B = candidate
    z = complex(R, X)
    coeff1 = (1 + 0.5j * z * B, -1.0, -z, 0.0)
    coeff2 = (-0.5j * B, -0.5j * B, 1.0, 1.0)
    cols = []
    for k, m in enumerate(data.channels()):
        unit = np.exp(1j * np.angle(m))
        cols.append((k, unit))
    for k, m in enumerate(data.channels()):
        if k == 0:
            continue
        cols.append((k, 1j * m))
    S = np.empty((4 * len(data), len(cols)))
    for j, (k, d) in enumerate(cols):
        S[:, j] = _stack(coeff1[k] * d, coeff2[k] * d)
    return S


def estimate_biases(
    snapshots: Sequence[MeasurementSnapshot] | PositiveSequenceData,
    candidate: tuple[float, float, float],
    step: float = FD_STEP,
) -> tuple[np.ndarray, float]:
    """Seven channel biases that best reconcile the data with ``candidate``.

    Solves ``S·b ≈ -r0`` in the least-squares sense, where ``r0`` is the
    stacked residual of the uncorrected data and ``S`` its sensitivity to the
    biases. Returns the biases and the residual norm after correction.
    """
    data = snapshots if isinstance(snapshots, PositiveSequenceData) else PositiveSequenceData.from_snapshots(snapshots)
    r0 = stacked_residual(data, candidate, np.zeros(len(CLUSTER_CHANNELS)))
    S = sensitivity_matrix(data, candidate, step)
    b = solve_least_squares(RegressionSystem(S, -r0, CLUSTER_CHANNELS)).x
    fit = float(np.linalg.norm(stacked_residual(data, candidate, b)))
    return b, fit


def candidate_grid(reference: tuple[float, float, float], config: ScanConfig) -> list[tuple[float, float, float]]:
    """Candidates on the ±alpha box; axes with one point sit at the reference."""
    axes = []
    for ref, n in zip(reference, config.points_per_axis):
        if n == 1:
            axes.append(np.array([ref]))
        else:
            lo, hi = sorted(((1 - config.alpha) * ref, (1 + config.alpha) * ref))
            axes.append(np.linspace(lo, hi, n))
    return [tuple(float(v) for v in c) for c in itertools.product(*axes)]


def _reference_triple(reference) -> tuple[float, float, float]:
    if hasattr(reference, "r_ems"):
        return (reference.r_ems, reference.x_ems, reference.b_ems)
    r, x, b = reference
    return (float(r), float(x), float(b))


def scan_feasible_region(
    snapshots: Sequence[MeasurementSnapshot] | PositiveSequenceData,
    reference,
    config: ScanConfig = ScanConfig(),
    workers: int = 1,
) -> list[CandidateSolution]:
    """Fit biases at every grid candidate; results are in grid order."""
    data = snapshots if isinstance(snapshots, PositiveSequenceData) else PositiveSequenceData.from_snapshots(snapshots)
    grid = candidate_grid(_reference_triple(reference), config)

    def solve(c):
        b, fit = estimate_biases(data, c)
        return CandidateSolution(c, b, fit)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve, grid))
    return [solve(c) for c in grid]


def _main_cluster(values: np.ndarray, eps: float, min_pts: int) -> tuple[np.ndarray, float]:
    """Member indices and spread of the largest cluster (empty if none)."""
    result = cluster(values, DbscanConfig(eps, min_pts))
    main = result.main_cluster()
    if main < 0:
        return np.array([], dtype=int), np.inf
    members = result.members(main)
    return members, float(np.std(values[members]))


def select_by_dbscan(candidates: Sequence[CandidateSolution], config: ScanConfig = ScanConfig()) -> CalibrationResult:
    """Pick the candidate whose biases co-cluster tightest.

    Walking the eps ladder upward, the first distance at which any
    candidate forms a cluster decides. At that distance the candidate with
    the largest main cluster (fewest outlier channels) wins; ties go to the
    smaller within-cluster standard deviation, then the smaller fit residual,
    then grid order.
    """
    if not candidates:
        raise NoCandidates("no candidates to select from")
    ladder = config.dbscan_eps_ladder
    values = [np.asarray(c.biases, dtype=float) for c in candidates]

    for eps in ladder:
        scored = []
        for i, v in enumerate(values):
            members, spread = _main_cluster(v, eps, config.min_pts)
            if members.size:
                scored.append((-members.size, spread, candidates[i].fit_residual, i, members))
        if scored:
            break
    else:
        # nothing clusters at any distance: fall back to the best fit
        i = min(range(len(candidates)), key=lambda k: (candidates[k].fit_residual, k))
        scored = [(0, np.inf, candidates[i].fit_residual, i, np.array([], dtype=int))]
        eps = ladder[-1]

    _, spread, _, best, members = min(scored, key=lambda s: s[:4])
    chosen = candidates[best]
    sizes = tuple(_main_cluster(values[best], e, config.min_pts)[0].size for e in ladder)
    in_cluster = set(int(m) for m in members)
    return CalibrationResult(
        candidate=chosen.candidate,
        candidate_index=best,
        bias=chosen.bias_vector(),
        cluster_channels=tuple(CLUSTER_CHANNELS[m] for m in sorted(in_cluster)),
        outlier_channels={
            CLUSTER_CHANNELS[j]: float(values[best][j])
            for j in range(len(CLUSTER_CHANNELS)) if j not in in_cluster
        },
        winning_eps=float(eps),
        cluster_spread=float(spread) if members.size else float("nan"),
        fit_residual=chosen.fit_residual,
        cluster_sizes=sizes,
    )


def calibrate(snapshots, reference, config: ScanConfig = ScanConfig(), workers: int = 1):
    """Scan then select; returns ``(result, candidates)``."""
    candidates = scan_feasible_region(snapshots, reference, config, workers)
    return select_by_dbscan(candidates, config), candidates
