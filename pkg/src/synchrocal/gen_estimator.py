"""Generator inertia, turbine time constant, damping and droop from PMU series.

The closed loop from electrical-power deviation to speed deviation,

    w/Pe = -(1 + T s) / (2HT s^2 + (2H + T K_D) s + K_D + 1/K_R),

discretizes with step h into the third-order ARMA recursion

    y(k) = -a1 y(k-1) - a2 y(k-2) - a3 y(k-3) + b2 u(k-2) + b3 u(k-3)

where y is the speed deviation and u the electrical-power deviation.
The coefficients are fitted by ordinary least squares and mapped back to
(H, T, K_D, K_R) in closed form.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateCoefficients, RankDeficient, TooShort
from .numerics import CONDITION_THRESHOLD, RegressionSystem, solve_least_squares

MIN_SAMPLES = 10
ARMA_LABELS = ("a1", "a2", "a3", "b2", "b3")
PARAM_LABELS = ("inertia_h", "turbine_t", "damping_kd", "regulation_kr")


@dataclass(frozen=True)
class GeneratorParameters:
    inertia_h: float
    turbine_t: float
    damping_kd: float
    regulation_kr: float

    def __post_init__(self):
        if not self.inertia_h > 0:
            raise ValueError(f"inertia_h must be > 0, got {self.inertia_h}")
        if not self.turbine_t > 0:
            raise ValueError(f"turbine_t must be > 0, got {self.turbine_t}")
        if self.regulation_kr == 0:
            raise ValueError("regulation_kr must be nonzero")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(PARAM_LABELS, astuple(self)))


@dataclass(frozen=True)
class ArmaCoefficients:
    a1: float
    a2: float
    a3: float
    b2: float
    b3: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


@dataclass(frozen=True)
class GenTimeSeries:
    step_h: float
    w_delta: np.ndarray
    pe_delta: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w_delta, dtype=float).reshape(-1)
        u = np.asarray(self.pe_delta, dtype=float).reshape(-1)
        if not self.step_h > 0:
            raise ValueError(f"step_h must be > 0, got {self.step_h}")
        if w.shape != u.shape:
            raise ValueError(f"series lengths differ: {w.size} vs {u.size}")
        object.__setattr__(self, "w_delta", w)
        object.__setattr__(self, "pe_delta", u)

    def __len__(self) -> int:
        return self.w_delta.size


@dataclass(frozen=True)
class ArmaFit:
    coefficients: ArmaCoefficients
    residual_variance: float
    condition: float
    rows: int


def arma_from_params(p: GeneratorParameters, h: float) -> ArmaCoefficients:
    H, T, KD, KR = p.inertia_h, p.turbine_t, p.damping_kd, p.regulation_kr
    den = 2 * H * T
    return ArmaCoefficients(
        a1=-2.0,
        a2=(2 * H * T + 2 * H * h + T * h * KD + h * h * KD + h * h / KR) / den,
        a3=-h * (2 * H + T * KD) / den,
        b2=-(h * h + T * h) / den,
        b3=h / (2 * H),
    )


def _check(value: float, scale: float, name: str) -> None:
    if abs(value) <= 1e-14 * max(scale, 1e-300):
        raise DegenerateCoefficients(f"{name} denominator vanishes", denominator=name)


def params_from_arma(c: ArmaCoefficients, h: float) -> GeneratorParameters:
    """Closed-form inverse of :func:`arma_from_params`."""
    a2, a3, b2, b3 = c.a2, c.a3, c.b2, c.b3
    _check(b3, 1.0, "b3 (H)")
    s = b2 + b3
    _check(s, abs(b2) + abs(b3), "b2 + b3 (T)")
    kd_num = s - a3 * b3
    kr_den = b3 * b3 * (-a2 - a3 + 1) - s * kd_num
    _check(kr_den, b3 * b3 * (abs(a2) + abs(a3) + 1) + abs(s) * (abs(s) + abs(a3 * b3)), "K_R")
    try:
        return GeneratorParameters(
            inertia_h=h / (2 * b3),
            turbine_t=-b3 / s * h,
            damping_kd=kd_num / (b3 * b3),
            regulation_kr=b3 * b3 * s / kr_den,
        )
    except ValueError as exc:
        raise DegenerateCoefficients(f"coefficients map to nonphysical parameters: {exc}") from None


def arma_regression(series: GenTimeSeries) -> RegressionSystem:
    y, u = series.w_delta, series.pe_delta
    k = np.arange(3, len(series))
    H = np.column_stack([-y[k - 1], -y[k - 2], -y[k - 3], u[k - 2], u[k - 3]])
    return RegressionSystem(H, y[k], ARMA_LABELS)


def fit_arma_rows(H: np.ndarray, target: np.ndarray,
                  condition_threshold: float = CONDITION_THRESHOLD) -> ArmaFit:
    system = RegressionSystem(H, target, ARMA_LABELS)
    if not np.any(H):
        raise RankDeficient("series carries no excitation", condition=np.inf)
    sol = solve_least_squares(system, condition_threshold)
    dof = max(1, H.shape[0] - H.shape[1])
    return ArmaFit(ArmaCoefficients(*map(float, sol.x)), sol.residual_norm**2 / dof,
                   sol.condition, H.shape[0])


def identify_arma(series: GenTimeSeries,
                  condition_threshold: float = CONDITION_THRESHOLD) -> ArmaFit:
    """OLS fit of the ARMA coefficients over rows k = 3 .. N-1."""
    if len(series) < MIN_SAMPLES:
        raise TooShort(f"{len(series)} samples, at least {MIN_SAMPLES} required")
    system = arma_regression(series)
    return fit_arma_rows(system.H, system.Z, condition_threshold)


def estimate_generator(series: GenTimeSeries) -> tuple[GeneratorParameters, ArmaFit]:
    fit = identify_arma(series)
    return params_from_arma(fit.coefficients, series.step_h), fit


def steady_state_gain(p: GeneratorParameters) -> float:
    """Speed deviation per unit step of electrical power, at s = 0."""
    return -1.0 / (p.damping_kd + 1.0 / p.regulation_kr)


def arma_step(c: ArmaCoefficients, y: Sequence[float], u: Sequence[float], k: int) -> float:
    return -c.a1 * y[k - 1] - c.a2 * y[k - 2] - c.a3 * y[k - 3] + c.b2 * u[k - 2] + c.b3 * u[k - 3]
