"""Dense least squares: unconstrained and box-constrained.

Both estimators reduce to ``min ||H x - Z||`` over a handful of unknowns
(at most a few dozen), so everything here is dense and exact at
convergence. The bounded solver is a primal active-set method over box
constraints (bounded-variable least squares).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NoConvergence, RankDeficient

CONDITION_THRESHOLD = 1e10
KKT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class RegressionSystem:
    """Linear model ``Z = H x`` with named unknowns."""

    H: np.ndarray
    Z: np.ndarray
    column_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        Z = np.asarray(self.Z, dtype=float).reshape(-1)
        if H.ndim != 2:
            raise DimensionMismatch(f"H must be 2-D, got shape {H.shape}")
        m, n = H.shape
        if m < 1 or n < 1:
            raise DimensionMismatch(f"H must be non-empty, got shape {H.shape}")
        if Z.shape[0] != m:
            raise DimensionMismatch(f"Z has {Z.shape[0]} entries, H has {m} rows")
        labels = tuple(self.column_labels) or tuple(f"x{j}" for j in range(n))
        if len(labels) != n:
            raise DimensionMismatch(f"{len(labels)} column labels for {n} columns")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(Z))):
            raise DimensionMismatch("regression system contains NaN or Inf")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "column_labels", labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.H.shape

    def objective(self, x) -> float:
        r = self.H @ np.asarray(x, dtype=float) - self.Z
        return 0.5 * float(r @ r)


@dataclass(frozen=True)
class Bounds:
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        lb = np.asarray(self.lb, dtype=float).reshape(-1)
        ub = np.asarray(self.ub, dtype=float).reshape(-1)
        if lb.shape != ub.shape:
            raise DimensionMismatch(f"lb has {lb.size} entries, ub has {ub.size}")
        if np.any(np.isnan(lb)) or np.any(np.isnan(ub)):
            raise DimensionMismatch("bounds contain NaN")
        if np.any(lb > ub):
            j = int(np.argmax(lb > ub))
            raise DimensionMismatch(f"lb[{j}]={lb[j]} exceeds ub[{j}]={ub[j]}")
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @classmethod
    def unbounded(cls, n: int) -> "Bounds":
        return cls(np.full(n, -np.inf), np.full(n, np.inf))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lb - tol) and np.all(x <= self.ub + tol))


@dataclass(frozen=True)
class LeastSquaresSolution:
    x: np.ndarray
    residual_norm: float
    condition: float
    iterations: int = 0
    active: tuple[int, ...] = ()
    kkt_residual: float = 0.0


def condition_estimate(H: np.ndarray) -> float:
    """Ratio of extreme singular values; ``inf`` for a numerically singular H."""
    s = np.linalg.svd(H, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return np.inf
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def _check_rank(system: RegressionSystem, threshold: float) -> float:
    m, n = system.shape
    if m < n:
        raise RankDeficient(
            f"{m} equations for {n} unknowns; add measurements", condition=np.inf
        )
    cond = condition_estimate(system.H)
    if not cond <= threshold:
        raise RankDeficient(
            f"condition estimate {cond:.3g} exceeds {threshold:.3g}; "
            "measurements lack excitation",
            condition=cond,
        )
    return cond


def _lstsq(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Householder QR; A is tall and full column rank by the time we get here.
    q, r = np.linalg.qr(A, mode="reduced")
    return solve_triangular(r, q.T @ b)


def solve_least_squares(
    system: RegressionSystem, condition_threshold: float = CONDITION_THRESHOLD
) -> LeastSquaresSolution:
    """Minimize ``||H x - Z||`` by orthogonal factorization.

    Raises RankDeficient when the singular-value ratio of H exceeds
    ``condition_threshold``.
    """
    cond = _check_rank(system, condition_threshold)
    x = _lstsq(system.H, system.Z)
    res = float(np.linalg.norm(system.H @ x - system.Z))
    return LeastSquaresSolution(x=x, residual_norm=res, condition=cond)


def projected_gradient(system: RegressionSystem, bounds: Bounds, x) -> np.ndarray:
    """Gradient of the LS objective with components pushing out of the box zeroed."""
    x = np.asarray(x, dtype=float)
    g = system.H.T @ (system.H @ x - system.Z)
    pg = g.copy()
    pg[(x <= bounds.lb) & (g > 0)] = 0.0
    pg[(x >= bounds.ub) & (g < 0)] = 0.0
    return pg


def solve_bounded_least_squares(
    system: RegressionSystem,
    bounds: Bounds,
    tol: float = KKT_TOLERANCE,
    max_iter: int | None = None,
    condition_threshold: float = CONDITION_THRESHOLD,
) -> LeastSquaresSolution:
    """Minimize ``0.5 ||H x - Z||^2`` subject to ``lb <= x <= ub``.

    Primal active-set iteration. A working set of variables is pinned to
    bounds; the remaining ones take their unconstrained LS values given the
    pinned ones. Infeasible steps are shortened to the first bound hit and
    the blocking variable joins the working set; a pinned variable whose
    gradient points into the box is released. Terminates when the KKT
    residual drops below ``tol`` relative to ``||H^T Z||``.

    Returned components satisfy the bounds exactly.
    """
    H, Z = system.H, system.Z
    n = H.shape[1]
    if bounds.lb.size != n:
        raise DimensionMismatch(f"{bounds.lb.size} bounds for {n} unknowns")
    cond = _check_rank(system, condition_threshold)
    lb, ub = bounds.lb, bounds.ub
    if max_iter is None:
        max_iter = 20 * n + 50

    scale = max(float(np.max(np.abs(H.T @ Z))), float(np.max(np.abs(H))) ** 2, 1e-300)
    x_free = _lstsq(H, Z)
    if bounds.contains(x_free):
        res = float(np.linalg.norm(H @ x_free - Z))
        return LeastSquaresSolution(x=x_free, residual_norm=res, condition=cond)

    # ||H x - Z|| and ||R x - Q^T Z|| differ by a constant: iterate on the n x n factor
    q, R = np.linalg.qr(H, mode="reduced")
    c = q.T @ Z

    x = np.clip(x_free, lb, ub)
    pinned = (x_free < lb) | (x_free > ub) | (lb == ub)
    x[lb == ub] = lb[lb == ub]

    for it in range(1, max_iter + 1):
        free = ~pinned
        if np.any(free):
            rhs = c - R[:, pinned] @ x[pinned]
            y = _lstsq(R[:, free], rhs)
            xf = x[free]
            lbf, ubf = lb[free], ub[free]
            below, above = y < lbf, y > ubf
            if np.any(below | above):
                d = y - xf
                ratios = np.full(y.shape, np.inf)
                ratios[below] = (lbf[below] - xf[below]) / d[below]
                ratios[above] = (ubf[above] - xf[above]) / d[above]
                alpha = float(np.clip(np.min(ratios), 0.0, 1.0))
                xf = xf + alpha * d
                hit = ratios <= alpha + 1e-14
                xf = np.where(hit & below, lbf, xf)
                xf = np.where(hit & above, ubf, xf)
                xf = np.clip(xf, lbf, ubf)
                x[free] = xf
                idx = np.flatnonzero(free)[hit]
                pinned[idx] = True
                continue
            x[free] = y

        g = R.T @ (R @ x - c)
        at_lb = pinned & (x <= lb) & (lb < ub)
        at_ub = pinned & (x >= ub) & (lb < ub)
        violation = np.zeros(n)
        violation[at_lb] = -g[at_lb]
        violation[at_ub] = g[at_ub]
        j = int(np.argmax(violation))
        if violation[j] <= tol * scale:
            x = np.clip(x, lb, ub)
            pg = projected_gradient(system, bounds, x)
            return LeastSquaresSolution(
                x=x,
                residual_norm=float(np.linalg.norm(H @ x - Z)),
                condition=cond,
                iterations=it,
                active=tuple(int(k) for k in np.flatnonzero(pinned)),
                kkt_residual=float(np.max(np.abs(pg))) / scale,
            )
        pinned[j] = False

    raise NoConvergence(
        f"bounded least squares did not converge in {max_iter} iterations "
        f"(condition {cond:.3g})"
    )

