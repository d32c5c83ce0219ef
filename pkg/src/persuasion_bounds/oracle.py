"""Brute-force sharp bounds by searching the polytope of latent tables.

A latent table is the joint pmf of (Y(0), Y(1), D). Under MTR the (1, 0)
column is empty and the table has six cells; otherwise it has eight. The
observed cells pin down all but two (MTR) or four (no MTR) entries, and MTS
adds linear restrictions on the free ones. Every estimand is a ratio of
linear functions of the table, so its extrema sit on the boundary of the
region; a grid search followed by a shrinking pattern search finds them to
well below 1e-5.

This module never calls the closed forms in :mod:`persuasion_bounds.bounds`;
it is the independent route the closed forms are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, EmptyRegion, InconsistentLatent
from .model import (
    SHARES,
    AssumptionSet,
    Estimand,
    Interval,
    JointDistribution,
    validate,
)

REGION_TOL = 1e-12
LATENT_TOL = 1e-10
REFINE_TOL = 1e-7
DEFAULT_GRID_MTR = 1e-3
DEFAULT_GRID_FULL = 5e-3
_CHUNK = 200_000

# Column order of the (Y(0), Y(1)) types inside a layout row.
_NP, _TP, _DF, _AP = 0, 1, 2, 3


@dataclass(frozen=True)
class LatentTable:
    """Six cells ``q1..q6`` (MTR) or eight cells ``q1..q8`` (no MTR).

    Six-cell order: D=0 types (0,0), (0,1), (1,1), then the same for D=1.
    Eight-cell order: D=0 types (0,0), (0,1), (1,0), (1,1), then D=1.
    """

    q: tuple

    def __post_init__(self):
        q = tuple(float(v) for v in self.q)
        if len(q) not in (6, 8):
            raise ValueError(f"latent table needs 6 or 8 cells, got {len(q)}")
        object.__setattr__(self, "q", q)

    @property
    def mtr(self) -> bool:
        return len(self.q) == 6

    def layout(self) -> np.ndarray:
        """2 x 4 array indexed by [d, type] with types (0,0), (0,1), (1,0), (1,1)."""
        q = self.q
        if self.mtr:
            return np.array([[q[0], q[1], 0.0, q[2]], [q[3], q[4], 0.0, q[5]]])
        return np.array([q[:4], q[4:]])

    def check(self, dist: JointDistribution, tol: float = LATENT_TOL) -> None:
        lay = self.layout()
        if lay.min() < -tol or abs(lay.sum() - 1.0) > tol:
            raise InconsistentLatent(f"not a probability table: {self.q}")
        observed = {
            "P00": lay[0, _NP] + lay[0, _TP],
            "P10": lay[0, _DF] + lay[0, _AP],
            "P01": lay[1, _NP] + lay[1, _DF],
            "P11": lay[1, _TP] + lay[1, _AP],
        }
        target = {"P00": dist.p00, "P10": dist.p10, "P01": dist.p01, "P11": dist.p11}
        for key, value in observed.items():
            if abs(value - target[key]) > tol:
                raise InconsistentLatent(f"{key}: table gives {value!r}, data {target[key]!r}")

    def satisfies_mts(self, tol: float = LATENT_TOL) -> bool:
        lay = self.layout()
        q0, q1 = lay[0].sum(), lay[1].sum()
        y1_treated = (lay[1, _TP] + lay[1, _AP]) / q1
        y1_control = (lay[0, _TP] + lay[0, _AP]) / q0
        y0_treated = (lay[1, _DF] + lay[1, _AP]) / q1
        y0_control = (lay[0, _DF] + lay[0, _AP]) / q0
        return y1_treated >= y1_control - tol and y0_treated >= y0_control - tol


@dataclass(frozen=True)
class FeasibleRegion:
    """Free latent cells with their box limits and pairwise-sum limits.

    ``pairs`` holds ``(i, j, lo, hi)`` meaning ``lo <= x[i] + x[j] <= hi``.
    """

    assumptions: AssumptionSet
    dist: JointDistribution
    names: tuple
    lower: tuple
    upper: tuple
    pairs: tuple = ()

    @property
    def dim(self) -> int:
        return len(self.names)

    def contains(self, x: Sequence[float], tol: float = REGION_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if np.any(x < np.asarray(self.lower) - tol) or np.any(x > np.asarray(self.upper) + tol):
            return False
        return all(lo - tol <= x[i] + x[j] <= hi + tol for i, j, lo, hi in self.pairs)

    def layout(self, x: np.ndarray) -> np.ndarray:
        """Map free cells of shape (..., dim) to layouts of shape (..., 2, 4)."""
        x = np.asarray(x, dtype=float)
        P = self.dist
        out = np.empty(x.shape[:-1] + (2, 4))
        if self.assumptions.mtr:
            q2, q5 = x[..., 0], x[..., 1]
            out[..., 0, _NP] = P.p00 - q2
            out[..., 0, _TP] = q2
            out[..., 0, _DF] = 0.0
            out[..., 0, _AP] = P.p10
            out[..., 1, _NP] = P.p01
            out[..., 1, _TP] = q5
            out[..., 1, _DF] = 0.0
            out[..., 1, _AP] = P.p11 - q5
        else:
            q2, q4, q7, q8 = (x[..., k] for k in range(4))
            out[..., 0, _NP] = P.p00 - q2
            out[..., 0, _TP] = q2
            out[..., 0, _DF] = P.p10 - q4
            out[..., 0, _AP] = q4
            out[..., 1, _NP] = P.p01 - q7
            out[..., 1, _TP] = P.p11 - q8
            out[..., 1, _DF] = q7
            out[..., 1, _AP] = q8
        return out

    def latent(self, x: Sequence[float]) -> LatentTable:
        lay = self.layout(np.asarray(x, dtype=float))
        if self.assumptions.mtr:
            return LatentTable((lay[0, _NP], lay[0, _TP], lay[0, _AP],
                                lay[1, _NP], lay[1, _TP], lay[1, _AP]))
        return LatentTable(tuple(lay[0]) + tuple(lay[1]))


def _nonneg(value: float, what: str) -> float:
    if value < -REGION_TOL:
        raise EmptyRegion(f"{what}: upper limit {value!r} is negative")
    return max(value, 0.0)


def feasible_region(assumptions: AssumptionSet, dist: JointDistribution) -> FeasibleRegion:
    dist = validate(dist)
    P00, P10, P01, P11 = dist.cells()
    Q0, Q1 = P00 + P10, P01 + P11
    if assumptions.mtr:
        if assumptions.mts:
            q2_hi = _nonneg(P00 - P01 * (P10 + P00) / (P01 + P11), "q2")
            q5_hi = _nonneg(P11 - P10 * (P01 + P11) / (P00 + P10), "q5")
        else:
            q2_hi, q5_hi = P00, P11
        return FeasibleRegion(assumptions, dist, ("q2", "q5"), (0.0, 0.0), (q2_hi, q5_hi))

    pairs = ()
    if assumptions.mts:
        pairs = ((0, 1, 0.0, P11 * Q0 / Q1), (2, 3, P10 * Q1 / Q0, Q1))
    region = FeasibleRegion(
        assumptions, dist, ("q2", "q4", "q7", "q8"),
        (0.0, 0.0, 0.0, 0.0), (P00, P10, P01, P11), pairs,
    )
    for i, j, lo, hi in pairs:
        if lo > min(hi, region.upper[i] + region.upper[j]) + REGION_TOL:
            raise EmptyRegion(f"{region.names[i]}+{region.names[j]} cannot reach {lo!r}")
    return region


def estimand_values(estimand: Estimand, layout: np.ndarray) -> np.ndarray:
    """Evaluate an estimand on layouts of shape (..., 2, 4)."""
    c0, c1 = layout[..., 0, :], layout[..., 1, :]
    np_ = c0[..., _NP] + c1[..., _NP]
    tp = c0[..., _TP] + c1[..., _TP]
    df = c0[..., _DF] + c1[..., _DF]
    ap = c0[..., _AP] + c1[..., _AP]
    estimand = Estimand(estimand)
    if estimand is Estimand.APR:
        return tp / (np_ + tp)
    if estimand is Estimand.R_APR:
        return tp / (tp + ap)
    if estimand is Estimand.PS:
        return c0[..., _TP] / (c0[..., _NP] + c0[..., _TP])
    if estimand is Estimand.PN:
        return c1[..., _TP] / (c1[..., _TP] + c1[..., _AP])
    if estimand in (Estimand.PNS, Estimand.SHARE_TP):
        return tp
    if estimand is Estimand.ATE:
        return tp - df
    if estimand is Estimand.SHARE_NP:
        return np_
    return ap


def evaluate_estimand(estimand: Estimand, q: LatentTable, dist: JointDistribution) -> float:
    """Value of ``estimand`` at a latent table consistent with ``dist``."""
    q.check(dist)
    return float(estimand_values(estimand, q.layout()))


class _Chart:
    """Maps the unit cube onto a feasible region.

    Box variables are affine in their coordinate. For a pair ``x_i + x_j``
    constrained to ``[lo, hi]`` the first member spans its attainable range
    and the second spans the range left over given the first.
    """

    def __init__(self, region: FeasibleRegion):
        self.region = region
        lo = np.array(region.lower, dtype=float)
        hi = np.array(region.upper, dtype=float)
        self.lo, self.hi = lo, hi
        self.pair_of = {}
        self.spans = hi - lo
        for i, j, slo, shi in region.pairs:
            a_lo = max(lo[i], slo - hi[j])
            a_hi = min(hi[i], shi - lo[j])
            self.pair_of[i] = ("first", j, a_lo, a_hi)
            self.pair_of[j] = ("second", i, slo, shi)
            self.spans[i] = max(a_hi - a_lo, 0.0)
            self.spans[j] = hi[j] - lo[j]

    def to_x(self, u: np.ndarray) -> np.ndarray:
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        x = np.empty_like(u)
        for k in range(u.shape[-1]):
            info = self.pair_of.get(k)
            if info is None:
                x[..., k] = self.lo[k] + u[..., k] * (self.hi[k] - self.lo[k])
            elif info[0] == "first":
                _, _, a_lo, a_hi = info
                x[..., k] = a_lo + u[..., k] * max(a_hi - a_lo, 0.0)
        for k, info in self.pair_of.items():
            if info[0] == "second":
                _, i, slo, shi = info
                b_lo = np.maximum(self.lo[k], slo - x[..., i])
                b_hi = np.minimum(self.hi[k], shi - x[..., i])
                x[..., k] = b_lo + u[..., k] * np.maximum(b_hi - b_lo, 0.0)
        return x

    def grid(self, step: float) -> list[np.ndarray]:
        return [np.linspace(0.0, 1.0, max(2, int(math.ceil(s / step)) + 1)) for s in self.spans]


def _values(chart: _Chart, estimands, u: np.ndarray) -> np.ndarray:
    lay = chart.region.layout(chart.to_x(u))
    return np.stack([estimand_values(e, lay) for e in estimands], axis=-1)


@dataclass(frozen=True)
class Extremum:
    value: float
    latent: LatentTable


def _refine(chart: _Chart, estimand: Estimand, sign: float, u0: np.ndarray, width: np.ndarray):
    """Pattern search on the unit cube for ``sign * estimand``."""
    dim = u0.size
    stencil = np.array(np.meshgrid(*([[-1.0, 0.0, 1.0]] * dim), indexing="ij")).reshape(dim, -1).T
    scale = np.maximum(chart.spans, 1e-300)
    center = u0.copy()
    best = sign * _values(chart, (estimand,), center[None, :])[0, 0]
    width = width.copy()
    for _ in range(2000):
        if np.all(width * scale < REFINE_TOL):
            break
        cand = np.clip(center + stencil * width, 0.0, 1.0)
        vals = sign * _values(chart, (estimand,), cand)[:, 0]
        k = int(np.argmax(vals))
        if vals[k] > best + 1e-15:
            best, center = vals[k], cand[k]
        else:
            width = width / 2.0
    return center, sign * best


def oracle_extrema(
    assumptions: AssumptionSet,
    dist: JointDistribution,
    estimands: Iterable[Estimand],
    grid: Optional[float] = None,
) -> dict:
    """Minimum and maximum of each estimand over the feasible region.

    Returns ``{estimand: (Extremum_min, Extremum_max)}`` with the optimizing
    latent tables attached.
    """
    dist = validate(dist)
    estimands = tuple(Estimand(e) for e in estimands)
    if grid is None:
        grid = DEFAULT_GRID_MTR if assumptions.mtr else DEFAULT_GRID_FULL
    if not 0.0 < grid <= 0.05:
        raise DomainError(f"grid step {grid!r} outside (0, 0.05]")
    region = feasible_region(assumptions, dist)
    chart = _Chart(region)
    axes = chart.grid(grid)
    dim = region.dim

    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=-1)
    best_hi = np.full(len(estimands), -np.inf)
    best_lo = np.full(len(estimands), np.inf)
    arg_hi = np.zeros((len(estimands), dim))
    arg_lo = np.zeros((len(estimands), dim))
    for start in range(0, len(flat), _CHUNK):
        block = flat[start:start + _CHUNK]
        vals = _values(chart, estimands, block)
        k_hi, k_lo = vals.argmax(axis=0), vals.argmin(axis=0)
        for e in range(len(estimands)):
            if vals[k_hi[e], e] > best_hi[e]:
                best_hi[e], arg_hi[e] = vals[k_hi[e], e], block[k_hi[e]]
            if vals[k_lo[e], e] < best_lo[e]:
                best_lo[e], arg_lo[e] = vals[k_lo[e], e], block[k_lo[e]]

    width = np.array([1.0 / (len(a) - 1) for a in axes])
    out = {}
    for e, estimand in enumerate(estimands):
        u_lo, v_lo = _refine(chart, estimand, -1.0, arg_lo[e], width)
        u_hi, v_hi = _refine(chart, estimand, 1.0, arg_hi[e], width)
        out[estimand] = (
            Extremum(float(v_lo), region.latent(chart.to_x(u_lo))),
            Extremum(float(v_hi), region.latent(chart.to_x(u_hi))),
        )
    return out


def sharp_bounds_oracle(
    estimand: Estimand,
    assumptions: AssumptionSet,
    dist: JointDistribution,
    grid: Optional[float] = None,
) -> Interval:
    estimand = Estimand(estimand)
    lo, hi = oracle_extrema(assumptions, dist, (estimand,), grid)[estimand]
    return Interval(lo.value, hi.value)


def shares_oracle(
    assumptions: AssumptionSet,
    dist: JointDistribution,
    grid: Optional[float] = None,
) -> tuple[Interval, Interval, Interval]:
    """(NP, AP, TP) share intervals; without MTR defiers take the remainder."""
    ext = oracle_extrema(assumptions, dist, SHARES, grid)
    return tuple(Interval(ext[s][0].value, ext[s][1].value) for s in SHARES)
