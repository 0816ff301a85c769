"""Phasor value types, symmetrical components and the PMU error model.

A PMU channel reports a phasor ``V∠θ``. A systematic error on that channel
is a pair ``(dV, dθ)`` relating the reading to the physical quantity by

    true = (V + dV) · exp(j(θ + dθ))

``remove_bias`` applies that relation; ``apply_error`` inverts it (to
corrupt a true value into a reading) and then adds Gaussian noise.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, fields
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, ResultNegativeMagnitude

A_OP = cmath.exp(2j * math.pi / 3)

# rows: zero, positive, negative; analysis form with 1/3 scaling
SEQ_FORWARD = np.array(
    [[1, 1, 1], [1, A_OP, A_OP**2], [1, A_OP**2, A_OP]], dtype=complex
) / 3.0
SEQ_INVERSE = np.array(
    [[1, 1, 1], [1, A_OP**2, A_OP], [1, A_OP, A_OP**2]], dtype=complex
)

CHANNELS = ("vs", "vr", "is", "ir")


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(theta, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped


@dataclass(frozen=True)
class Phasor:
    magnitude: float
    angle: float = 0.0

    def __post_init__(self):
        mag, ang = float(self.magnitude), float(self.angle)
        if not (math.isfinite(mag) and math.isfinite(ang)):
            raise ValueError(f"non-finite phasor {mag}∠{ang}")
        if mag < 0:
            raise ValueError(f"negative phasor magnitude {mag}")
        object.__setattr__(self, "magnitude", mag)
        object.__setattr__(self, "angle", normalize_angle(ang))

    @classmethod
    def from_complex(cls, z: complex) -> "Phasor":
        z = complex(z)
        return cls(abs(z), cmath.phase(z) if z != 0 else 0.0)

    @classmethod
    def from_degrees(cls, magnitude: float, degrees: float) -> "Phasor":
        return cls(magnitude, math.radians(degrees))

    def __complex__(self) -> complex:
        return cmath.rect(self.magnitude, self.angle)


@dataclass(frozen=True)
class ThreePhaseSet:
    a: Phasor
    b: Phasor
    c: Phasor

    @classmethod
    def from_complex(cls, values: Sequence[complex]) -> "ThreePhaseSet":
        if len(values) != 3:
            raise DimensionMismatch(f"expected 3 phase values, got {len(values)}")
        return cls(*(Phasor.from_complex(v) for v in values))

    @classmethod
    def balanced(cls, magnitude: float, angle: float = 0.0) -> "ThreePhaseSet":
        step = 2 * math.pi / 3
        return cls(
            Phasor(magnitude, angle),
            Phasor(magnitude, angle - step),
            Phasor(magnitude, angle + step),
        )

    def __iter__(self) -> Iterator[Phasor]:
        return iter((self.a, self.b, self.c))

    def as_array(self) -> np.ndarray:
        return np.array([complex(p) for p in self], dtype=complex)


@dataclass(frozen=True)
class MeasurementSnapshot:
    """One time-aligned PMU reading at both terminals of a line.

    Currents are positive flowing into the line at their own terminal.
    """

    timestamp: int
    v_s: ThreePhaseSet
    v_r: ThreePhaseSet
    i_s: ThreePhaseSet
    i_r: ThreePhaseSet

    def channel(self, name: str) -> ThreePhaseSet:
        return getattr(self, name[0] + "_" + name[1])

    @cached_property
    def arrays(self) -> np.ndarray:
        """``(4, 3)`` complex array, rows in ``CHANNELS`` order."""
        return np.array([self.channel(ch).as_array() for ch in CHANNELS])

    @classmethod
    def from_arrays(cls, timestamp: int, vs, vr, is_, ir) -> "MeasurementSnapshot":
        return cls(
            int(timestamp),
            ThreePhaseSet.from_complex(vs),
            ThreePhaseSet.from_complex(vr),
            ThreePhaseSet.from_complex(is_),
            ThreePhaseSet.from_complex(ir),
        )


def stack_channels(snapshots: Sequence[MeasurementSnapshot]) -> dict[str, np.ndarray]:
    """Per-channel ``(K, 3)`` complex arrays for a list of snapshots."""
    stacked = np.array([s.arrays for s in snapshots], dtype=complex).reshape(-1, 4, 3)
    return {ch: stacked[:, k, :] for k, ch in enumerate(CHANNELS)}


@dataclass(frozen=True)
class BiasVector:
    """Systematic magnitude (p.u.) and angle (rad) errors of the four channels."""

    d_vs: float = 0.0
    d_vr: float = 0.0
    d_is: float = 0.0
    d_ir: float = 0.0
    d_th_vs: float = 0.0
    d_th_vr: float = 0.0
    d_th_is: float = 0.0
    d_th_ir: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not math.isfinite(v):
                raise ValueError(f"{f.name} is not finite")
            if f.name.startswith("d_th_") and abs(v) >= math.pi / 2:
                raise ValueError(f"{f.name}={v} rad exceeds the pi/2 sanity bound")
            object.__setattr__(self, f.name, v)

    def channel(self, name: str) -> tuple[float, float]:
        return getattr(self, "d_" + name), getattr(self, "d_th_" + name)

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def to_sequence(s: ThreePhaseSet) -> tuple[Phasor, Phasor, Phasor]:
    """(zero, positive, negative) sequence components of a 3-phase set."""
    z0, z1, z2 = SEQ_FORWARD @ s.as_array()
    return Phasor.from_complex(z0), Phasor.from_complex(z1), Phasor.from_complex(z2)


def from_sequence(zero: Phasor, positive: Phasor, negative: Phasor) -> ThreePhaseSet:
    abc = SEQ_INVERSE @ np.array([complex(zero), complex(positive), complex(negative)])
    return ThreePhaseSet.from_complex(abc)


def positive_sequence(abc: np.ndarray) -> np.ndarray:
    """Positive-sequence component along the last axis of a ``(..., 3)`` array."""
    return np.asarray(abc, dtype=complex) @ SEQ_FORWARD[1]


def remove_bias(measured: Phasor, bias: tuple[float, float]) -> Phasor:
    """True phasor ``(V + dV)∠(θ + dθ)`` from a biased reading."""
    d_mag, d_ang = bias
    mag = measured.magnitude + d_mag
    if mag < 0:
        raise ResultNegativeMagnitude(
            f"bias {d_mag} drives magnitude {measured.magnitude} negative"
        )
    return Phasor(mag, measured.angle + d_ang)


def apply_error(
    true_value: Phasor,
    bias: tuple[float, float] = (0.0, 0.0),
    noise: tuple[float, float] = (0.0, 0.0),
    rng: np.random.Generator | None = None,
) -> Phasor:
    """Reading a biased, noisy PMU channel would report for ``true_value``."""
    d_mag, d_ang = bias
    sigma_mag, sigma_ang = noise
    if sigma_mag < 0 or sigma_ang < 0:
        raise ValueError("noise standard deviations must be non-negative")
    mag = true_value.magnitude - d_mag
    if mag < 0:
        raise ResultNegativeMagnitude(
            f"bias {d_mag} exceeds true magnitude {true_value.magnitude}"
        )
    ang = true_value.angle - d_ang
    if sigma_mag > 0 or sigma_ang > 0:
        if rng is None:
            raise ValueError("an rng is required when noise is non-zero")
        mag += sigma_mag * rng.standard_normal()
        ang += sigma_ang * rng.standard_normal()
        if mag < 0:
            # same complex value, kept representable
            mag, ang = -mag, ang + math.pi
    return Phasor(mag, ang)


def remove_bias_array(measured: np.ndarray, d_mag, d_ang) -> np.ndarray:
    """Vectorized ``remove_bias`` on complex arrays (no sign checks)."""
    measured = np.asarray(measured, dtype=complex)
    return (np.abs(measured) + d_mag) * np.exp(1j * (np.angle(measured) + d_ang))


@dataclass(frozen=True)
class LineParameters:
    """3-phase PI-model line: series impedance and total shunt susceptance (p.u.)."""

    z_abc: np.ndarray
    b_abc: np.ndarray

    def __post_init__(self):
        z = np.array(self.z_abc, dtype=complex).reshape(3, 3)
        b = np.array(self.b_abc, dtype=complex).reshape(3, 3)
        if np.any(np.abs(b.imag) > 0):
            raise ValueError("susceptance matrix must be real")
        b = b.real.copy()
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(b))):
            raise ValueError("line matrices must be finite")
        if not (np.array_equal(z, z.T) and np.array_equal(b, b.T)):
            raise ValueError("line matrices must be exactly symmetric")
        if np.any(np.diag(z).real < 0):
            raise ValueError("phase resistances must be non-negative")
        z.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "z_abc", z)
        object.__setattr__(self, "b_abc", b)

    @property
    def g_abc(self) -> np.ndarray:
        return self.z_abc @ self.b_abc

    @classmethod
    def balanced(cls, z_self: complex, z_mutual: complex, b_self: float, b_mutual: float) -> "LineParameters":
        z = np.full((3, 3), complex(z_mutual))
        np.fill_diagonal(z, complex(z_self))
        b = np.full((3, 3), float(b_mutual))
        np.fill_diagonal(b, float(b_self))
        return cls(z, b)

    def __eq__(self, other):
        if not isinstance(other, LineParameters):
            return NotImplemented
        return np.array_equal(self.z_abc, other.z_abc) and np.array_equal(self.b_abc, other.b_abc)

    __hash__ = None
