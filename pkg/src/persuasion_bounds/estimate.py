"""Plug-in estimates of the bound endpoints with cluster-robust standard errors.

Standard errors come from influence functions. For the main MTR+MTS row the
influence vector is that of ``(p1, p0, Pr(Y=1))``, where ``p_d`` is the
success rate in arm ``d``; the endpoint gradients are written out by hand.
For the other assumption rows the influence vector is that of the four cell
probabilities and the gradient of the closed-form endpoint is taken by
central differences. Weights are frequency weights.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

import numpy as np

from . import bounds
from .errors import (
    BoundaryCell,
    EmptyArm,
    InconsistentPanel,
    SharesNotCovered,
    TooFewClusters,
    UnknownColumn,
)
from .model import (
    MTR_MTS,
    AssumptionSet,
    Estimand,
    JointDistribution,
)

PANEL_TOL = 5e-4
FD_STEP = 1e-6

Filter = Union[None, Mapping[str, object], Callable[[dict], np.ndarray]]


@dataclass
class MicroSample:
    """Row-level data: outcome, treatment, optional cluster ids and weights.

    ``extra`` keeps every other column as an array of strings so it can be
    used for subgroup filters.
    """

    y: np.ndarray
    d: np.ndarray
    cluster: Optional[np.ndarray] = None
    weight: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y)
        self.d = np.asarray(self.d)
        n = self.y.shape[0]
        if self.d.shape != (n,):
            raise ValueError("y and d must be 1-d arrays of equal length")
        for name, arr in (("y", self.y), ("d", self.d)):
            if not np.all((arr == 0) | (arr == 1)):
                raise ValueError(f"{name} must be coded 0/1")
        self.y = self.y.astype(np.int8)
        self.d = self.d.astype(np.int8)
        if self.weight is None:
            self.weight = np.ones(n)
        self.weight = np.asarray(self.weight, dtype=float)
        if self.weight.shape != (n,):
            raise ValueError("weight must match the number of rows")
        if not np.all(np.isfinite(self.weight)) or np.any(self.weight <= 0):
            raise ValueError("weights must be finite and positive")
        if self.cluster is not None:
            self.cluster = np.asarray(self.cluster)
            if self.cluster.shape != (n,):
                raise ValueError("cluster must match the number of rows")
        self.extra = {k: np.asarray(v) for k, v in self.extra.items()}
        for k, v in self.extra.items():
            if v.shape != (n,):
                raise ValueError(f"column {k!r} must match the number of rows")

    def __len__(self) -> int:
        return int(self.y.shape[0])

    def subset(self, mask: np.ndarray) -> "MicroSample":
        mask = np.asarray(mask, dtype=bool)
        return MicroSample(
            self.y[mask],
            self.d[mask],
            None if self.cluster is None else self.cluster[mask],
            self.weight[mask],
            {k: v[mask] for k, v in self.extra.items()},
        )

    @classmethod
    def from_csv(cls, path, y="y", d="d", cluster=None, weight=None) -> "MicroSample":
        """Read a comma-separated file with a header row."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            rows = list(reader)
        for col in (y, d, cluster, weight):
            if col is not None and col not in header:
                raise UnknownColumn(f"column {col!r} not in {header}")
        cols = {name: np.array([r[name] for r in rows], dtype=str) for name in header}
        try:
            yv = cols[y].astype(int) if rows else np.zeros(0, int)
            dv = cols[d].astype(int) if rows else np.zeros(0, int)
            wv = cols[weight].astype(float) if weight else None
        except ValueError as exc:
            raise ValueError(f"{path}: could not parse numeric column: {exc}") from None
        used = {y, d, cluster, weight}
        extra = {k: v for k, v in cols.items() if k not in used}
        return cls(yv, dv, cols[cluster] if cluster else None, wv, extra)

    def to_csv(self, path) -> None:
        """Write ``y,d[,cluster][,weight]`` plus extra columns with a header row."""
        cols = {"y": self.y, "d": self.d}
        if self.cluster is not None:
            cols["cluster"] = self.cluster
        if not np.all(self.weight == 1.0):
            cols["weight"] = [repr(float(w)) for w in self.weight]
        cols.update(self.extra)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(cols)
            writer.writerows(zip(*cols.values()))


@dataclass(frozen=True)
class CellCounts:
    n00: float
    n10: float
    n01: float
    n11: float
    n: float
    g: int

    def joint(self) -> JointDistribution:
        return JointDistribution.from_counts(self.n00, self.n10, self.n01, self.n11)


@dataclass(frozen=True)
class BoundEstimate:
    estimand: Estimand
    lower_hat: float
    upper_hat: float
    se_lower: float = math.nan
    se_upper: float = math.nan
    n: float = math.nan
    g: int = 0
    assumptions: AssumptionSet = MTR_MTS


def apply_filter(sample: MicroSample, filter: Filter = None) -> MicroSample:
    if filter is None:
        return sample
    if callable(filter):
        return sample.subset(np.asarray(filter(sample.extra), dtype=bool))
    mask = np.ones(len(sample), dtype=bool)
    for col, value in filter.items():
        if col not in sample.extra:
            raise UnknownColumn(f"filter column {col!r} not in {sorted(sample.extra)}")
        mask &= sample.extra[col].astype(str) == str(value)
    return sample.subset(mask)


def _n_clusters(sample: MicroSample) -> int:
    if sample.cluster is None:
        return len(sample)
    return int(np.unique(sample.cluster).size)


def tabulate(sample: MicroSample, filter: Filter = None) -> CellCounts:
    s = apply_filter(sample, filter)
    w, y, d = s.weight, s.y, s.d
    cells = {
        (yy, dd): math.fsum(w[(y == yy) & (d == dd)]) for yy in (0, 1) for dd in (0, 1)
    }
    for arm in (0, 1):
        if cells[(0, arm)] + cells[(1, arm)] <= 0:
            raise EmptyArm(f"no rows with d={arm} after filtering")
    return CellCounts(
        cells[(0, 0)], cells[(1, 0)], cells[(0, 1)], cells[(1, 1)],
        math.fsum(w), _n_clusters(s),
    )


def _check_cells(counts: CellCounts) -> None:
    if min(counts.n00, counts.n10, counts.n01, counts.n11) <= 0:
        raise BoundaryCell(f"empty (y, d) cell in {counts}")


def _mtr_mts_points(dist: JointDistribution) -> dict:
    """Unclamped plug-in endpoints under MTR+MTS; the specification test needs the sign."""
    theta = bounds.theta_upper(dist)
    theta_r = bounds.theta_r_upper(dist)
    ate = bounds.ate_upper(dist)
    np_, ap, _ = bounds.shares_bounds(dist)
    return {
        Estimand.APR: (0.0, theta),
        Estimand.R_APR: (0.0, theta_r),
        Estimand.PS: (0.0, theta),
        Estimand.PN: (0.0, theta_r),
        Estimand.PNS: (0.0, ate),
        Estimand.ATE: (0.0, ate),
        Estimand.SHARE_TP: (0.0, ate),
        Estimand.SHARE_NP: (np_.lower, np_.upper),
        Estimand.SHARE_AP: (ap.lower, ap.upper),
    }


def _row_points(assumptions: AssumptionSet, dist: JointDistribution) -> dict:
    if assumptions.mtr and assumptions.mts:
        return _mtr_mts_points(dist)
    out = {}
    for e in Estimand:
        try:
            iv = bounds.sharp_bounds(e, assumptions, dist)
        except SharesNotCovered:
            continue
        out[e] = (iv.lower, iv.upper)
    return out


def point_estimates(counts: CellCounts, assumptions: AssumptionSet = MTR_MTS) -> dict:
    """Plug-in endpoint estimates (standard errors left as NaN)."""
    _check_cells(counts)
    dist = counts.joint()
    return {
        e: BoundEstimate(e, lo, hi, n=counts.n, g=counts.g, assumptions=assumptions)
        for e, (lo, hi) in _row_points(assumptions, dist).items()
    }


def _cluster_cov(sample: MicroSample, psi: np.ndarray) -> np.ndarray:
    """``g/(g-1) * sum_c S_c S_c' / n^2`` with ``S_c`` the weighted cluster sums."""
    w = sample.weight
    n = math.fsum(w)
    weighted = psi * w[:, None]
    if sample.cluster is None:
        sums = weighted
    else:
        _, idx = np.unique(sample.cluster, return_inverse=True)
        g = int(idx.max()) + 1
        sums = np.stack([np.bincount(idx, weights=col, minlength=g) for col in weighted.T], axis=1)
    g = sums.shape[0]
    return (g / (g - 1)) * (sums.T @ sums) / n**2


def _se(grad, cov) -> float:
    grad = np.asarray(grad, dtype=float)
    if not np.any(grad):
        return 0.0
    return float(math.sqrt(max(grad @ cov @ grad, 0.0)))


def _mtr_mts_gradients(p1: float, p0: float) -> dict:
    """Gradients of (lower, upper) endpoints in ``(p1, p0, Pr(Y=1))``."""
    zero = (0.0, 0.0, 0.0)
    g_theta = (1.0 / (1.0 - p0), (p1 - 1.0) / (1.0 - p0) ** 2, 0.0)
    g_theta_r = (p0 / p1**2, -1.0 / p1, 0.0)
    g_ate = (1.0, -1.0, 0.0)
    return {
        Estimand.APR: (zero, g_theta),
        Estimand.PS: (zero, g_theta),
        Estimand.R_APR: (zero, g_theta_r),
        Estimand.PN: (zero, g_theta_r),
        Estimand.ATE: (zero, g_ate),
        Estimand.PNS: (zero, g_ate),
        Estimand.SHARE_TP: (zero, g_ate),
        Estimand.SHARE_NP: ((-1.0, 0.0, 0.0), (0.0, 0.0, -1.0)),
        Estimand.SHARE_AP: ((0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
    }


def _endpoint_gradients(assumptions: AssumptionSet, cells: np.ndarray, step: float = FD_STEP):
    """Central-difference gradients of every endpoint in the four cells."""
    grads = {}
    for k in range(4):
        e_k = np.zeros(4)
        e_k[k] = step
        plus = cells + e_k
        minus = cells - e_k
        hi = _row_points(assumptions, JointDistribution(*(plus / plus.sum())))
        lo = _row_points(assumptions, JointDistribution(*(minus / minus.sum())))
        for e in hi:
            g = grads.setdefault(e, (np.zeros(4), np.zeros(4)))
            g[0][k] = (hi[e][0] - lo[e][0]) / (2 * step)
            g[1][k] = (hi[e][1] - lo[e][1]) / (2 * step)
    return grads


def clustered_se(
    sample: MicroSample,
    filter: Filter = None,
    assumptions: AssumptionSet = MTR_MTS,
    method: str = "auto",
) -> dict:
    """Endpoint estimates with cluster-robust delta-method standard errors.

    ``method="auto"`` uses the closed-form gradients under MTR+MTS and
    numerical gradients elsewhere; ``"numeric"`` forces the latter.
    """
    s = apply_filter(sample, filter)
    counts = tabulate(s)
    if counts.g < 2:
        raise TooFewClusters(f"need at least 2 clusters, got {counts.g}")
    points = point_estimates(counts, assumptions)

    w, y, d = s.weight, s.y.astype(float), s.d.astype(float)
    n = counts.n
    if assumptions.mtr and assumptions.mts and method == "auto":
        q1 = (counts.n01 + counts.n11) / n
        q0 = (counts.n00 + counts.n10) / n
        p1 = counts.n11 / (counts.n01 + counts.n11)
        p0 = counts.n10 / (counts.n00 + counts.n10)
        py = (counts.n10 + counts.n11) / n
        psi = np.column_stack([d * (y - p1) / q1, (1 - d) * (y - p0) / q0, y - py])
        grads = _mtr_mts_gradients(p1, p0)
    else:
        cells = np.array([counts.n00, counts.n10, counts.n01, counts.n11]) / n
        ind = np.column_stack([
            (y == 0) & (d == 0), (y == 1) & (d == 0), (y == 0) & (d == 1), (y == 1) & (d == 1),
        ]).astype(float)
        psi = ind - cells
        grads = _endpoint_gradients(assumptions, cells)
    cov = _cluster_cov(s, psi)

    out = {}
    for e, est in points.items():
        g_lo, g_hi = grads[e]
        out[e] = BoundEstimate(
            e, est.lower_hat, est.upper_hat, _se(g_lo, cov), _se(g_hi, cov),
            counts.n, counts.g, assumptions,
        )
    return out


def reconstruct_joint(ap_lb: float, ap_ub: float, np_lb: float, np_ub: float,
                      tol: float = PANEL_TOL) -> JointDistribution:
    """Recover the (Y, D) cells from published AP/NP share bounds.

    Uses ``Pr(Y=1|D=0) = ap_lb`` and ``Pr(Y=1|D=1) = 1 - np_lb``, then solves
    the NP upper bound for ``Pr(D=0)``. ``ap_ub`` is only a consistency check
    (it must equal ``1 - np_ub`` up to ``tol`` in probability units).
    """
    pc0 = ap_lb
    pc1 = 1.0 - np_lb
    gap = pc1 - pc0
    if abs(gap) < 1e-12:
        raise InconsistentPanel("equal conditional success rates leave Pr(D=0) undetermined")
    q0 = (np_ub - np_lb) / gap
    if not 0.0 < q0 < 1.0:
        raise InconsistentPanel(f"implied Pr(D=0) = {q0!r} is not in (0, 1)")
    q1 = 1.0 - q0
    p10, p11 = q0 * pc0, q1 * pc1
    p00, p01 = q0 - p10, q1 - p11
    if abs((p10 + p11) - ap_ub) > tol:
        raise InconsistentPanel(
            f"implied Pr(Y=1) = {p10 + p11:.6f} misses AP upper bound {ap_ub:.6f}"
        )
    total = p00 + p10 + p01 + p11
    return JointDistribution(p00 / total, p10 / total, p01 / total, p11 / total)
