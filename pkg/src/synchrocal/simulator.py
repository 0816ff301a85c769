"""Synthetic, model-consistent PMU data for lines and generators.

Line snapshots are built forward from the receiving end: given the
receiving-bus voltage and the load admittance, the receiving current is
fixed and the PI-model equations give the sending-end voltage and current
in closed form,

    V_S = V_R + (j/2)·Z·B·V_R - Z·I_R
    I_S = (j/2)·B·(V_S + V_R) - I_R

so the truth satisfies the estimator's equations to rounding error.
Measured snapshots then pass every phasor through ``apply_error``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SingularCircuit, UnstableRecursion
from .gen_estimator import (
    GeneratorParameters,
    GenTimeSeries,
    arma_from_params,
    arma_step,
)
from .phasors import (
    CHANNELS,
    BiasVector,
    LineParameters,
    MeasurementSnapshot,
    ThreePhaseSet,
    apply_error,
)

DEFAULT_START_US = 1_700_000_000_000_000
DEFAULT_INTERVAL_US = 33_333
CIRCUIT_TOLERANCE = 1e-12
UNSTABLE_LIMIT = 1e6


def default_line() -> LineParameters:
    z1 = 0.01 + 0.10j
    z0 = 3 * z1
    b1, b0 = 0.20, 0.12
    return LineParameters.balanced((z0 + 2 * z1) / 3, (z0 - z1) / 3, (b0 + 2 * b1) / 3, (b0 - b1) / 3)


@dataclass(frozen=True)
class LineScenario:
    true_params: LineParameters
    receiving_voltages: Sequence[np.ndarray]
    load_admittances: Sequence[np.ndarray]
    noise: tuple[float, float] = (0.0, 0.0)
    bias: BiasVector = field(default_factory=BiasVector)
    snapshot_count: int | None = None
    rng_seed: int = 0
    start_us: int = DEFAULT_START_US
    interval_us: int = DEFAULT_INTERVAL_US

    def __post_init__(self):
        n = self.snapshot_count
        if n is None:
            n = len(self.load_admittances)
            object.__setattr__(self, "snapshot_count", n)
        if n < 1:
            raise ValueError("snapshot_count must be >= 1")
        if len(self.receiving_voltages) < n or len(self.load_admittances) < n:
            raise ValueError(
                f"profiles hold {len(self.receiving_voltages)} voltages and "
                f"{len(self.load_admittances)} loads, {n} snapshots requested"
            )
        for y in self.load_admittances[:n]:
            if np.any(np.real(np.diag(np.asarray(y))) < 0):
                raise ValueError("load admittances must be passive")
        if self.noise[0] < 0 or self.noise[1] < 0:
            raise ValueError("noise standard deviations must be non-negative")


def make_line_scenario(
    true_params: LineParameters | None = None,
    snapshot_count: int = 20,
    seed: int = 0,
    noise: tuple[float, float] = (0.0, 0.0),
    bias: BiasVector | None = None,
    balanced: bool = False,
    load_variation: float = 0.30,
    unbalance: float = 0.0,
) -> LineScenario:
    """Desk-scale scenario with a load varying ±``load_variation`` around 1 p.u.

    ``balanced=False`` gives each phase its own load and a slightly
    unbalanced bus voltage, which the 3-phase estimator needs to separate
    self and mutual terms. ``balanced=True`` keeps every quantity purely
    positive-sequence. ``unbalance`` > 0 adds a per-phase relative spread of
    that size to a balanced scenario: enough zero/negative-sequence content
    for the 3-phase estimator while staying close to balanced operation.
    """
    rng = np.random.default_rng([seed, 1])
    params = true_params if true_params is not None else default_line()
    vr, loads = [], []
    for _ in range(snapshot_count):
        mag = rng.uniform(0.95, 1.05)
        ang = rng.uniform(-0.3, 0.3)
        step = 2 * math.pi / 3
        base = mag * np.exp(1j * (ang - step * np.arange(3)))
        if balanced:
            v = base
            y = rng.uniform(1 - load_variation, 1 + load_variation) * np.exp(
                -1j * rng.uniform(0.1, 0.5)
            )
            Y = y * np.eye(3, dtype=complex)
            if unbalance > 0:
                v = v * (1 + unbalance * rng.uniform(-1, 1, 3))
                Y = Y @ np.diag((1 + unbalance * rng.uniform(-1, 1, 3))
                                * np.exp(1j * unbalance * rng.uniform(-1, 1, 3)))
        else:
            v = base * rng.uniform(0.98, 1.02, 3) * np.exp(1j * rng.uniform(-0.02, 0.02, 3))
            ys = rng.uniform(1 - load_variation, 1 + load_variation, 3) * np.exp(
                -1j * rng.uniform(0.1, 0.5, 3)
            )
            Y = np.diag(ys)
        vr.append(v)
        loads.append(Y)
    return LineScenario(
        true_params=params,
        receiving_voltages=vr,
        load_admittances=loads,
        noise=noise,
        bias=bias if bias is not None else BiasVector(),
        snapshot_count=snapshot_count,
        rng_seed=seed,
    )


def solve_terminal(params: LineParameters, v_r: np.ndarray, i_r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sending-end (V_S, I_S) from receiving-end (V_R, I_R)."""
    Z, B = params.z_abc, params.b_abc
    v_s = v_r + 0.5j * (Z @ B @ v_r) - Z @ i_r
    i_s = 0.5j * (B @ (v_s + v_r)) - i_r
    if not (np.all(np.isfinite(v_s)) and np.all(np.isfinite(i_s))):
        raise SingularCircuit("line equations produced non-finite terminal quantities")
    return v_s, i_s


def circuit_residual(params: LineParameters, v_s, v_r, i_s, i_r) -> float:
    """Largest absolute residual of the two PI-model equations."""
    Z, B = params.z_abc, params.b_abc
    r1 = v_s - v_r - Z @ i_s + 0.5j * (Z @ B @ v_s)
    r2 = i_s + i_r - 0.5j * (B @ (v_s + v_r))
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def simulate_line(scenario: LineScenario) -> tuple[list[MeasurementSnapshot], list[MeasurementSnapshot]]:
    """Return ``(truth, measured)`` snapshot lists."""
    rng = np.random.default_rng([scenario.rng_seed, 2])
    truth: list[MeasurementSnapshot] = []
    measured: list[MeasurementSnapshot] = []
    for k in range(scenario.snapshot_count):
        v_r = scenario.receiving_voltages[k]
        v_r = v_r.as_array() if isinstance(v_r, ThreePhaseSet) else np.asarray(v_r, dtype=complex)
        Y = np.asarray(scenario.load_admittances[k], dtype=complex)
        i_r = -(Y @ v_r)
        v_s, i_s = solve_terminal(scenario.true_params, v_r, i_r)
        scale = max(1.0, float(np.max(np.abs(np.concatenate([v_s, v_r, i_s, i_r])))))
        if circuit_residual(scenario.true_params, v_s, v_r, i_s, i_r) > CIRCUIT_TOLERANCE * scale:
            raise SingularCircuit("truth snapshot violates the line equations")
        ts = scenario.start_us + k * scenario.interval_us
        snap = MeasurementSnapshot.from_arrays(ts, v_s, v_r, i_s, i_r)
        truth.append(snap)
        corrupted = {}
        for ch in CHANNELS:
            bias = scenario.bias.channel(ch)
            corrupted[ch] = ThreePhaseSet(
                *(apply_error(p, bias, scenario.noise, rng) for p in snap.channel(ch))
            )
        measured.append(
            MeasurementSnapshot(ts, corrupted["vs"], corrupted["vr"], corrupted["is"], corrupted["ir"])
        )
    return truth, measured


@dataclass(frozen=True)
class GenScenario:
    params: GeneratorParameters
    step_h: float
    pe_delta_input: np.ndarray
    noise_sigma: float = 0.0
    rng_seed: int = 0
    initial_w: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.step_h > 0:
            raise ValueError("step_h must be > 0")
        if len(self.pe_delta_input) < 10:
            raise ValueError("pe_delta_input needs at least 10 samples")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


def step_input(n: int, size: float = 0.1, at: int = 10) -> np.ndarray:
    u = np.zeros(n)
    u[at:] = size
    return u


def prbs_input(n: int, size: float = 0.1, seed: int = 0, hold: int = 10) -> np.ndarray:
    """Random binary +-size signal switching on a ``hold``-sample grid.

    Unlike a single step, every resample of its regression rows still
    contains input transitions, which the bootstrap needs.
    """
    rng = np.random.default_rng([seed, 3])
    levels = rng.choice([-size, size], size=-(-n // hold))
    return np.repeat(levels, hold)[:n]


def simulate_gen(scenario: GenScenario) -> GenTimeSeries:
    c = arma_from_params(scenario.params, scenario.step_h)
    u = np.asarray(scenario.pe_delta_input, dtype=float)
    y = np.zeros(u.size)
    y[:3] = scenario.initial_w
    for k in range(3, u.size):
        y[k] = arma_step(c, y, u, k)
        if not abs(y[k]) <= UNSTABLE_LIMIT:
            raise UnstableRecursion(f"speed deviation reached {y[k]:.3g} at step {k}")
    if scenario.noise_sigma > 0:
        rng = np.random.default_rng(scenario.rng_seed)
        y = y + scenario.noise_sigma * rng.standard_normal(y.size)
    return GenTimeSeries(scenario.step_h, y, u.copy())
