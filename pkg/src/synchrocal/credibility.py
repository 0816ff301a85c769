"""Bootstrap credibility of PMU-based parameter estimates and reference screening.

A window of samples (line snapshots, or ARMA regression rows for a
generator) is resampled with replacement; the estimator is rerun on each
resample. The spread of those estimates relative to the reference value is
the credibility metric

    metric = std(x) / |x_ref|,   credible  <=>  metric <= eps

Only credible estimates may raise a discrepancy flag, and a flag becomes a
consistent-discrepancy alarm after m of the last n windows.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import NumericalError, TooManyFailedResamples, ZeroReference
from .gen_estimator import (
    GenTimeSeries,
    PARAM_LABELS,
    arma_regression,
    fit_arma_rows,
    params_from_arma,
)
from .line_estimator import DEFAULT_BOUND_FRACTION, estimate_line, sequence_values
from .refdb import GenReference, LineReference, PersistenceState

log = logging.getLogger(__name__)

Estimator = Callable[[Sequence[Any]], Mapping[str, float]]

DEFAULT_RESAMPLES = 200
MAX_ATTEMPTS_PER_RESAMPLE = 10

STATUS_OK = "ok"
STATUS_FLAGGED = "flagged"
STATUS_NOT_CREDIBLE = "not credible, screening skipped"


@dataclass(frozen=True)
class BootstrapDistribution:
    parameter_label: str
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).reshape(-1)
        if s.size < 2:
            raise ValueError("a bootstrap distribution needs at least 2 samples")
        object.__setattr__(self, "samples", s)

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def std_dev(self) -> float:
        return float(np.std(self.samples, ddof=1))


@dataclass(frozen=True)
class CredibilityEntry:
    label: str
    estimate: float
    x_ref: float
    metric: float
    credible: bool
    threshold: float


@dataclass(frozen=True)
class CredibilityReport:
    entries: dict[str, CredibilityEntry]
    window_id: str = ""

    @property
    def all_credible(self) -> bool:
        return all(e.credible for e in self.entries.values())


@dataclass(frozen=True)
class Discrepancy:
    deviation: float
    flagged: bool


@dataclass(frozen=True)
class ScreeningConfig:
    epsilon: float = 0.05
    discrepancy: float = 0.10
    persistence_m: int = 3
    persistence_n: int = 5
    resample_count: int = DEFAULT_RESAMPLES
    seed: int = 0
    bound_fraction: float = DEFAULT_BOUND_FRACTION
    workers: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.discrepancy >= 0:
            raise ValueError("discrepancy threshold must be >= 0")
        if not 1 <= self.persistence_m <= self.persistence_n:
            raise ValueError("persistence needs 1 <= m <= n")
        if self.resample_count < 2:
            raise ValueError("resample_count must be >= 2")


@dataclass(frozen=True)
class ScreeningOutcome:
    report: CredibilityReport
    discrepancies: dict[str, Discrepancy]
    persistence: dict[str, int]
    persistence_window: int
    consistent: tuple[str, ...]
    status: str
    point_estimate: dict[str, float] = field(default_factory=dict)

    @property
    def recommend_calibration(self) -> bool:
        return bool(self.consistent)


def _draw(seed: int, index: int, attempt: int, k: int) -> np.ndarray:
    return np.random.default_rng([seed, index, attempt]).integers(0, k, size=k)


def bootstrap(
    samples: Sequence[Any],
    estimator: Estimator,
    resample_count: int = DEFAULT_RESAMPLES,
    rng_seed: int = 0,
    workers: int = 1,
    max_failure_fraction: float = 0.5,
) -> list[BootstrapDistribution]:
    """Rerun ``estimator`` on ``resample_count`` resamples of ``samples``.

    Resample ``i`` on attempt ``a`` is drawn from a generator seeded with
    ``(rng_seed, i, a)``, so serial and parallel runs agree exactly.
    Resamples on which the estimator raises a NumericalError are re-drawn.
    """
    k = len(samples)
    if k < 1:
        raise ValueError("nothing to resample")
    if resample_count < 2:
        raise ValueError("resample_count must be >= 2")

    def run(i: int) -> tuple[Mapping[str, float] | None, int]:
        for attempt in range(MAX_ATTEMPTS_PER_RESAMPLE):
            idx = _draw(rng_seed, i, attempt, k)
            try:
                return estimator([samples[j] for j in idx]), attempt
            except NumericalError:
                continue
        return None, MAX_ATTEMPTS_PER_RESAMPLE

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(resample_count)))
    else:
        results = [run(i) for i in range(resample_count)]

    failed = sum(a for _, a in results)
    if failed > max_failure_fraction * resample_count or any(r is None for r, _ in results):
        raise TooManyFailedResamples(
            f"{failed} resamples discarded out of {resample_count} requested"
        )
    if failed:
        log.info("bootstrap re-drew %d degenerate resamples", failed)
    labels = list(results[0][0])
    return [
        BootstrapDistribution(label, np.array([r[label] for r, _ in results]))
        for label in labels
    ]


def credibility_metric(dist: BootstrapDistribution, x_ref: float, epsilon: float,
                       estimate: float | None = None) -> CredibilityEntry:
    if x_ref == 0:
        raise ZeroReference(f"reference for {dist.parameter_label} is zero")
    metric = dist.std_dev / abs(x_ref)
    return CredibilityEntry(
        label=dist.parameter_label,
        estimate=dist.mean if estimate is None else float(estimate),
        x_ref=float(x_ref),
        metric=metric,
        credible=metric <= epsilon,
        threshold=epsilon,
    )


# -- asset adapters ---------------------------------------------------------


def line_reference_values(ref: LineReference) -> dict[str, float]:
    values = {"r1": ref.r_ems, "x1": ref.x_ems, "b1": ref.b_ems}
    if ref.z0 is not None:
        values["r0"], values["x0"] = complex(ref.z0).real, complex(ref.z0).imag
    if ref.b0 is not None:
        values["b0"] = ref.b0
    return {k: v for k, v in values.items() if v != 0}


def line_estimator(reference: LineReference, bound_fraction: float, labels: Sequence[str]) -> Estimator:
    def estimate(snapshots):
        seq = sequence_values(estimate_line(snapshots, reference, bound_fraction).params)
        return {k: seq[k] for k in labels}

    return estimate


def generator_reference_values(ref: GenReference) -> dict[str, float]:
    values = dict(zip(PARAM_LABELS, (ref.h, ref.t, ref.kd, ref.kr)))
    return {k: v for k, v in values.items() if v != 0}


def generator_rows(series: GenTimeSeries) -> list[tuple[np.ndarray, float]]:
    system = arma_regression(series)
    return list(zip(system.H, system.Z))


def generator_estimator(step_h: float, labels: Sequence[str]) -> Estimator:
    def estimate(rows):
        H = np.array([r for r, _ in rows])
        y = np.array([t for _, t in rows])
        p = params_from_arma(fit_arma_rows(H, y).coefficients, step_h).as_dict()
        return {k: p[k] for k in labels}

    return estimate


def screen(
    data,
    reference: LineReference | GenReference,
    config: ScreeningConfig = ScreeningConfig(),
    state: PersistenceState | None = None,
    window_id: str = "",
) -> ScreeningOutcome:
    """Estimate, bootstrap, compare with the reference, update persistence.

    ``data`` is a list of snapshots for a line reference or a
    ``GenTimeSeries`` for a generator reference.
    """
    if isinstance(reference, LineReference):
        refs = line_reference_values(reference)
        estimator = line_estimator(reference, config.bound_fraction, list(refs))
        samples = list(data)
    else:
        refs = generator_reference_values(reference)
        estimator = generator_estimator(data.step_h, list(refs))
        samples = generator_rows(data)

    point = dict(estimator(samples))
    dists = bootstrap(samples, estimator, config.resample_count, config.seed, config.workers)
    entries = {
        d.parameter_label: credibility_metric(d, refs[d.parameter_label], config.epsilon,
                                              point[d.parameter_label])
        for d in dists
    }
    report = CredibilityReport(entries, window_id)

    discrepancies = {}
    for label, e in entries.items():
        deviation = abs(e.estimate - e.x_ref) / abs(e.x_ref)
        discrepancies[label] = Discrepancy(deviation, e.credible and deviation > config.discrepancy)

    if state is None:
        state = PersistenceState(config.persistence_n)
    state.record(window_id, {k: d.flagged for k, d in discrepancies.items()})
    counts = {k: state.count(k) for k in entries}
    consistent = tuple(k for k, c in counts.items() if c >= config.persistence_m)

    if not any(e.credible for e in entries.values()):
        status = STATUS_NOT_CREDIBLE
    elif consistent:
        status = STATUS_FLAGGED
    else:
        status = STATUS_OK
    return ScreeningOutcome(report, discrepancies, counts, state.capacity, consistent, status, point)
