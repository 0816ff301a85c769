"""3-phase transmission line parameters from two-terminal PMU snapshots.

The nodal equations of the PI model are

    V_S - V_R = Z·I_S - (j/2)·G·V_S,     G = Z·B
    2(I_S + I_R) - j·B·(V_S + V_R) = 0

Treating the 6 complex entries of Z, the 6 complex entries of G and the 6
real entries of B as independent unknowns keeps the problem linear: every
snapshot contributes 12 real rows in 30 unknowns. Terms containing an
unknown go into H, purely measured terms into Z. ``G = Z·B`` is not
enforced; it is reported afterwards as a consistency diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TooFewSnapshots
from .numerics import (
    CONDITION_THRESHOLD,
    Bounds,
    RegressionSystem,
    solve_bounded_least_squares,
)
from .phasors import LineParameters, MeasurementSnapshot, stack_channels

MIN_SNAPSHOTS = 3
DEFAULT_BOUND_FRACTION = 0.30

# unique entries of a symmetric 3x3 matrix, in (a, b, c, ab, bc, ac) order
ENTRY_NAMES = ("a", "b", "c", "ab", "bc", "ac")
ENTRY_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2))
_ENTRY_OF = {}
for _e, (_p, _q) in enumerate(ENTRY_INDEX):
    _ENTRY_OF[_p, _q] = _ENTRY_OF[_q, _p] = _e

Z_LABELS = tuple(f"{part}_{e}" for e in ENTRY_NAMES for part in ("R", "X"))
G_LABELS = tuple(f"G_{e}_{part}" for e in ENTRY_NAMES for part in ("re", "im"))
B_LABELS = tuple(f"B_{e}" for e in ENTRY_NAMES)
LABELS = Z_LABELS + G_LABELS + B_LABELS
N_UNKNOWNS = len(LABELS)
ROWS_PER_SNAPSHOT = 12

_Z0, _G0, _B0 = 0, 12, 24


@dataclass(frozen=True)
class LineEstimate:
    params: LineParameters
    g_abc: np.ndarray
    residual_norm: float
    condition_estimate: float
    snapshots_used: int
    consistency: float
    x: np.ndarray
    active_bounds: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in zip(LABELS, self.x)}


def pack_unknowns(z_abc, g_abc, b_abc) -> np.ndarray:
    """Flatten matrices into the 30-vector in column order of ``LABELS``."""
    x = np.empty(N_UNKNOWNS)
    for e, (p, q) in enumerate(ENTRY_INDEX):
        x[_Z0 + 2 * e] = z_abc[p, q].real
        x[_Z0 + 2 * e + 1] = z_abc[p, q].imag
        x[_G0 + 2 * e] = g_abc[p, q].real
        x[_G0 + 2 * e + 1] = g_abc[p, q].imag
        x[_B0 + e] = np.real(b_abc[p, q])
    return x


def unpack_unknowns(x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    z = np.empty((3, 3), dtype=complex)
    g = np.empty((3, 3), dtype=complex)
    b = np.empty((3, 3))
    for e, (p, q) in enumerate(ENTRY_INDEX):
        z[p, q] = z[q, p] = complex(x[_Z0 + 2 * e], x[_Z0 + 2 * e + 1])
        g[p, q] = g[q, p] = complex(x[_G0 + 2 * e], x[_G0 + 2 * e + 1])
        b[p, q] = b[q, p] = x[_B0 + e]
    return z, g, b


def pack_line(params: LineParameters) -> np.ndarray:
    return pack_unknowns(params.z_abc, params.g_abc, params.b_abc)


def assemble_regression(snapshots: Sequence[MeasurementSnapshot]) -> RegressionSystem:
    """Stack the 12 real rows of every snapshot into ``Z = H x``.

    Per snapshot the rows are Re/Im of the series equation for phases a, b, c
    followed by Re/Im of the shunt equation for phases a, b, c.
    """
    if len(snapshots) < 1:
        raise TooFewSnapshots("no snapshots supplied")
    ch = stack_channels(snapshots)
    return _assemble(ch["vs"], ch["vr"], ch["is"], ch["ir"])


def _assemble(vs, vr, i_s, i_r) -> RegressionSystem:
    K = vs.shape[0]
    H = np.zeros((K, ROWS_PER_SNAPSHOT, N_UNKNOWNS))
    Z = np.zeros((K, ROWS_PER_SNAPSHOT))
    w = vs + vr
    for p in range(3):
        re, im = 2 * p, 2 * p + 1
        for q in range(3):
            e = _ENTRY_OF[p, q]
            # Z[p,q]·I_S[q]
            H[:, re, _Z0 + 2 * e] += i_s[:, q].real
            H[:, re, _Z0 + 2 * e + 1] -= i_s[:, q].imag
            H[:, im, _Z0 + 2 * e] += i_s[:, q].imag
            H[:, im, _Z0 + 2 * e + 1] += i_s[:, q].real
            # -(j/2)·G[p,q]·V_S[q]
            H[:, re, _G0 + 2 * e] += 0.5 * vs[:, q].imag
            H[:, re, _G0 + 2 * e + 1] += 0.5 * vs[:, q].real
            H[:, im, _G0 + 2 * e] -= 0.5 * vs[:, q].real
            H[:, im, _G0 + 2 * e + 1] += 0.5 * vs[:, q].imag
        Z[:, re] = (vs[:, p] - vr[:, p]).real
        Z[:, im] = (vs[:, p] - vr[:, p]).imag

        re, im = 6 + 2 * p, 6 + 2 * p + 1
        for q in range(3):
            e = _ENTRY_OF[p, q]
            # -j·B[p,q]·(V_S + V_R)[q]
            H[:, re, _B0 + e] += w[:, q].imag
            H[:, im, _B0 + e] -= w[:, q].real
        Z[:, re] = -2 * (i_s[:, p] + i_r[:, p]).real
        Z[:, im] = -2 * (i_s[:, p] + i_r[:, p]).imag
    return RegressionSystem(
        H.reshape(K * ROWS_PER_SNAPSHOT, N_UNKNOWNS), Z.reshape(-1), LABELS
    )


def _groups() -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {"R": [], "X": [], "G_re": [], "G_im": [], "B": []}
    for j, label in enumerate(LABELS):
        if label.startswith("R_"):
            groups["R"].append(j)
        elif label.startswith("X_"):
            groups["X"].append(j)
        elif label.startswith("G_"):
            groups["G_" + label.rsplit("_", 1)[1]].append(j)
        else:
            groups["B"].append(j)
    return groups


def reference_bounds(reference: LineParameters, bound_fraction: float) -> Bounds:
    """Box of ±``bound_fraction`` around each packed reference component.

    A zero reference borrows the mean magnitude of the nonzero references in
    its group (R, X, Re G, Im G, B) for a symmetric band. Phase resistances
    are additionally kept non-negative.
    """
    if not 0 <= bound_fraction:
        raise ValueError("bound_fraction must be non-negative")
    r = pack_line(reference)
    f = bound_fraction
    lb = np.minimum((1 - f) * r, (1 + f) * r)
    ub = np.maximum((1 - f) * r, (1 + f) * r)
    for idx in _groups().values():
        idx = np.array(idx)
        vals = r[idx]
        nz = np.abs(vals[vals != 0])
        s = float(nz.mean()) if nz.size else 0.0
        zero = idx[vals == 0]
        lb[zero] = -f * s
        ub[zero] = f * s
    for name in ("R_a", "R_b", "R_c"):
        j = LABELS.index(name)
        lb[j] = max(lb[j], 0.0)
    return Bounds(lb, ub)


def _as_line_parameters(reference) -> LineParameters:
    if isinstance(reference, LineParameters):
        return reference
    from .refdb import expand_reference

    return expand_reference(reference)


def estimate_line(
    snapshots: Sequence[MeasurementSnapshot],
    reference,
    bound_fraction: float = DEFAULT_BOUND_FRACTION,
    condition_threshold: float = CONDITION_THRESHOLD,
) -> LineEstimate:
    """Bounded least-squares fit of the 30 line unknowns.

    ``reference`` is either 3-phase ``LineParameters`` or a ``LineReference``
    whose sequence values are expanded to balanced matrices.
    """
    if len(snapshots) < MIN_SNAPSHOTS:
        raise TooFewSnapshots(
            f"{len(snapshots)} snapshots supplied, at least {MIN_SNAPSHOTS} required"
        )
    ref = _as_line_parameters(reference)
    system = assemble_regression(snapshots)
    bounds = reference_bounds(ref, bound_fraction)
    sol = solve_bounded_least_squares(system, bounds, condition_threshold=condition_threshold)
    z, g, b = unpack_unknowns(sol.x)
    params = LineParameters(z, b)
    g_norm = np.linalg.norm(g)
    consistency = float(np.linalg.norm(g - z @ b) / g_norm) if g_norm > 0 else 0.0
    return LineEstimate(
        params=params,
        g_abc=g,
        residual_norm=sol.residual_norm,
        condition_estimate=sol.condition,
        snapshots_used=len(snapshots),
        consistency=consistency,
        x=sol.x,
        active_bounds=tuple(LABELS[j] for j in sol.active),
    )


def _balanced_average(m: np.ndarray) -> tuple[complex, complex]:
    diag = (m[0, 0] + m[1, 1] + m[2, 2]) / 3
    mutual = (m[0, 1] + m[1, 2] + m[0, 2]) / 3
    return diag, mutual


def extract_sequence(params: LineParameters) -> tuple[complex, complex, float, float]:
    """Positive- and zero-sequence ``(z1, z0, b1, b0)`` by balanced averaging."""
    zs, zm = _balanced_average(params.z_abc)
    bs, bm = _balanced_average(params.b_abc)
    return complex(zs - zm), complex(zs + 2 * zm), float(bs - bm), float(bs + 2 * bm)


def sequence_values(params: LineParameters) -> dict[str, float]:
    """Sequence quantities keyed the way references and reports name them."""
    z1, z0, b1, b0 = extract_sequence(params)
    return {"r1": z1.real, "x1": z1.imag, "b1": b1, "r0": z0.real, "x0": z0.imag, "b0": b0}
