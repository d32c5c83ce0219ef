"""Synthetic data-generating processes and a Monte Carlo coverage harness.

A DGP is a population of latent types (never-persuadable, already-persuaded,
treatment-persuadable and, when MTR is deliberately broken, defiers) with a
type-specific probability of being treated. Cluster effects shift the
selection logit and, optionally, the type composition of each cluster.

Every replication draws from its own Philox stream keyed by
``(seed, replication)``, so serial and parallel runs agree exactly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import bounds, oracle
from .errors import InvalidSpec, PersuasionBoundsError
from .estimate import MicroSample, clustered_se
from .inference import one_sided_ci, shares_ci, spec_test_ci
from .model import MTR_MTS, Estimand, JointDistribution

# Layout columns follow oracle: (Y(0), Y(1)) = (0,0), (0,1), (1,0), (1,1).
_Y0 = np.array([0, 0, 1, 1], dtype=np.int8)
_Y1 = np.array([0, 1, 0, 1], dtype=np.int8)
_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite_e.hermegauss(80)


def _expit(x):
    return 1.0 / (1.0 + np.exp(-x))


def _logit(p):
    return np.log(p) - np.log1p(-p)


@dataclass(frozen=True)
class DgpSpec:
    """Population of latent types with type-specific treatment selection.

    ``shares`` and ``selection`` are ordered (NP, AP, TP). ``rho`` scales a
    per-cluster shift of the selection logit (its standard deviation is
    ``rho / (1 - rho)``); ``outcome_rho`` perturbs the type shares of each
    cluster with a Dirichlet draw centred on ``shares``.
    """

    shares: tuple = (0.2, 0.7, 0.1)
    selection: tuple = (0.5, 0.5, 0.5)
    defier_share: float = 0.0
    defier_selection: float = 0.5
    clusters: Optional[int] = None
    per_cluster: int = 1
    rho: float = 0.0
    outcome_rho: float = 0.0
    break_mtr: bool = False
    break_mts: bool = False

    def __post_init__(self):
        object.__setattr__(self, "shares", tuple(float(s) for s in self.shares))
        object.__setattr__(self, "selection", tuple(float(s) for s in self.selection))
        if len(self.shares) != 3 or len(self.selection) != 3:
            raise InvalidSpec("shares and selection need three entries (NP, AP, TP)")
        if min(self.shares) < 0 or self.defier_share < 0:
            raise InvalidSpec("type shares must be nonnegative")
        if abs(sum(self.shares) + self.defier_share - 1.0) > 1e-12:
            raise InvalidSpec("type shares must sum to one")
        if self.defier_share > 0 and not self.break_mtr:
            raise InvalidSpec("a defier share violates MTR; set break_mtr")
        for s in self.selection + (self.defier_selection,):
            if not 0.0 < s < 1.0:
                raise InvalidSpec(f"selection probability {s} outside (0, 1)")
        if not (0.0 <= self.rho < 1.0 and 0.0 <= self.outcome_rho < 1.0):
            raise InvalidSpec("cluster effect scales must lie in [0, 1)")
        if self.per_cluster < 1 or (self.clusters is not None and self.clusters < 1):
            raise InvalidSpec("cluster sizes must be positive")
        dist = implied_joint(self)
        if not dist.is_interior():
            raise InvalidSpec(f"implied distribution is not interior: {dist.cells()}")
        if not self.break_mts and not satisfies_mts(self):
            raise InvalidSpec("selection pattern violates MTS; set break_mts")

    @property
    def type_shares(self) -> np.ndarray:
        np_, ap, tp = self.shares
        return np.array([np_, tp, self.defier_share, ap])

    @property
    def type_selection(self) -> np.ndarray:
        s_np, s_ap, s_tp = self.selection
        return np.array([s_np, s_tp, self.defier_selection, s_ap])

    @classmethod
    def null_effect(cls, dist: JointDistribution, **kwargs) -> "DgpSpec":
        """A DGP with no persuadable types that reproduces ``dist`` exactly."""
        py1 = dist.p10 + dist.p11
        return cls(
            shares=(1.0 - py1, py1, 0.0),
            selection=(dist.p01 / (1.0 - py1), dist.p11 / py1, 0.5),
            **kwargs,
        )

    def to_dict(self) -> dict:
        """JSON-ready field mapping; ``DgpSpec(**spec.to_dict())`` round-trips."""
        out = asdict(self)
        out["shares"], out["selection"] = list(self.shares), list(self.selection)
        return out


def _sigma(rho: float) -> float:
    return rho / (1.0 - rho)


def effective_selection(spec: DgpSpec) -> np.ndarray:
    """Population treatment probability per type, averaging over cluster shifts."""
    base = spec.type_selection
    if spec.rho == 0.0:
        return base
    shifted = _expit(_logit(base)[:, None] + _sigma(spec.rho) * _GH_NODES[None, :])
    return shifted @ _GH_WEIGHTS / _GH_WEIGHTS.sum()


def population_layout(spec: DgpSpec) -> np.ndarray:
    """Latent table as a 2 x 4 array indexed by [d, type]."""
    share = spec.type_shares
    s = effective_selection(spec)
    return np.array([share * (1.0 - s), share * s])


def implied_joint(spec: DgpSpec) -> JointDistribution:
    lay = population_layout(spec)
    p00 = lay[0, 0] + lay[0, 1]
    p10 = lay[0, 2] + lay[0, 3]
    p01 = lay[1, 0] + lay[1, 2]
    p11 = lay[1, 1] + lay[1, 3]
    total = p00 + p10 + p01 + p11
    return JointDistribution(p00 / total, p10 / total, p01 / total, p11 / total)


def satisfies_mts(spec: DgpSpec) -> bool:
    """Check ``Pr(Y(d)=1 | D=1) >= Pr(Y(d)=1 | D=0)`` on the latent population."""
    lay = population_layout(spec)
    q0, q1 = lay[0].sum(), lay[1].sum()
    for col in (_Y1, _Y0):
        if lay[1] @ col / q1 < lay[0] @ col / q0 - 1e-12:
            return False
    return True


def true_value(spec: DgpSpec, estimand: Estimand) -> float:
    return float(oracle.estimand_values(Estimand(estimand), population_layout(spec)))


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replication])))


def draw_sample(spec: DgpSpec, size=None, seed=0, rng: Optional[np.random.Generator] = None) -> MicroSample:
    """Draw a clustered sample.

    ``size`` is a row count ``n`` (split into clusters of ``spec.per_cluster``
    rows) or an explicit ``(G, m)`` pair; by default ``spec.clusters`` clusters
    are drawn.
    """
    if isinstance(size, tuple):
        G, m = size
    elif size is not None:
        m = spec.per_cluster
        G = max(int(size) // m, 1)
    elif spec.clusters is not None:
        G, m = spec.clusters, spec.per_cluster
    else:
        raise InvalidSpec("no sample size given")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))

    n = G * m
    cluster = np.repeat(np.arange(G), m)
    shares = spec.type_shares
    if spec.outcome_rho > 0.0:
        conc = (1.0 - spec.outcome_rho) / spec.outcome_rho
        probs = np.zeros((G, 4))
        pos = shares > 0
        probs[:, pos] = rng.dirichlet(shares[pos] * conc, size=G)
    else:
        probs = np.broadcast_to(shares, (G, 4))
    cum = np.cumsum(probs, axis=1)
    cum[:, -1] = 1.0
    u = rng.random(n)
    types = (u[:, None] > cum[cluster]).sum(axis=1)

    logit_s = _logit(spec.type_selection)[types]
    if spec.rho > 0.0:
        logit_s = logit_s + _sigma(spec.rho) * rng.standard_normal(G)[cluster]
    d = (rng.random(n) < _expit(logit_s)).astype(np.int8)
    y = np.where(d == 1, _Y1[types], _Y0[types])
    return MicroSample(y=y, d=d, cluster=cluster)


@dataclass
class McReport:
    spec: dict
    targets: list
    n: int
    replications: int
    alpha: float
    seed: int
    coverage: dict = field(default_factory=dict)
    spec_test_empty_rate: float = math.nan
    failed: int = 0

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(asdict(self), indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "McReport":
        return cls(**json.loads(text))


def _one_replication(spec, targets, n, alpha, seed, r, fractions, truths, pop_bounds):
    rng = replication_rng(seed, r)
    sample = draw_sample(spec, n, rng=rng)
    try:
        ests = clustered_se(sample, assumptions=MTR_MTS)
    except PersuasionBoundsError:
        return None
    row = {}
    for t in targets:
        est = ests[t]
        lo, hi = pop_bounds[t]
        if t in (Estimand.SHARE_NP, Estimand.SHARE_AP):
            ci = shares_ci(est, alpha)
            covers_bound = ci.lower <= lo and hi <= ci.upper
            interior = [ci.contains(lo + f * (hi - lo)) for f in fractions]
        else:
            ci = one_sided_ci(est, alpha)
            covers_bound = hi <= ci.upper
            interior = [ci.contains(f * hi) for f in fractions]
        row[t] = (ci.contains(truths[t]), covers_bound, interior,
                  ci.lower, ci.upper, est.lower_hat, est.upper_hat)
    empty = spec_test_ci(ests[Estimand.APR], alpha).empty
    return row, empty


def _run_chunk(args):
    spec, targets, n, alpha, seed, reps, fractions, truths, pop_bounds = args
    return [_one_replication(spec, targets, n, alpha, seed, r, fractions, truths, pop_bounds)
            for r in reps]


def _population_bounds(spec: DgpSpec, t: Estimand):
    dist = implied_joint(spec)
    d = dist.p11 / (dist.p01 + dist.p11) - dist.p10 / (dist.p00 + dist.p10)
    if d < 0:
        # Outside MTR+MTS the population bound is the unclamped plug-in target.
        upper = {Estimand.APR: bounds.theta_upper, Estimand.PS: bounds.theta_upper,
                 Estimand.R_APR: bounds.theta_r_upper, Estimand.PN: bounds.theta_r_upper}
        return 0.0, upper.get(t, bounds.ate_upper)(dist)
    iv = bounds.sharp_bounds(t, MTR_MTS, dist)
    return iv.lower, iv.upper


def run_coverage(
    spec: DgpSpec,
    targets: Sequence = (Estimand.APR,),
    n: int = 5000,
    R: int = 1000,
    alpha: float = 0.05,
    seed: int = 0,
    fractions: Sequence[float] = (0.25, 0.5, 0.75),
    n_jobs: int = 1,
) -> McReport:
    """Coverage of the true parameter and of the MTR+MTS identified set.

    ``fractions`` are interior points ``lower + f * (upper - lower)`` of the
    population identified set whose coverage is also reported.
    """
    if R < 100:
        raise InvalidSpec("use at least 100 replications")
    targets = [Estimand(t) for t in targets]
    truths = {t: true_value(spec, t) for t in targets}
    pop_bounds = {t: _population_bounds(spec, t) for t in targets}
    fractions = tuple(float(f) for f in fractions)

    reps = list(range(R))
    if n_jobs > 1:
        chunks = [reps[i::n_jobs] for i in range(n_jobs)]
        args = [(spec, targets, n, alpha, seed, c, fractions, truths, pop_bounds) for c in chunks]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_run_chunk, args))
        results = [None] * R
        for c, part in zip(chunks, parts):
            for r, res in zip(c, part):
                results[r] = res
    else:
        results = _run_chunk((spec, targets, n, alpha, seed, reps, fractions, truths, pop_bounds))

    ok = [res for res in results if res is not None]
    report = McReport(spec.to_dict(), [t.value for t in targets], n, R, alpha, seed,
                      failed=R - len(ok))
    if not ok:
        return report
    m = len(ok)
    for t in targets:
        rows = [res[0][t] for res in ok]
        cov_true = sum(r[0] for r in rows) / m
        cov_bound = sum(r[1] for r in rows) / m
        report.coverage[t.value] = {
            "true_value": truths[t],
            "bound_lower": pop_bounds[t][0],
            "bound_upper": pop_bounds[t][1],
            "coverage_true": cov_true,
            "coverage_bound": cov_bound,
            "coverage_interior": {
                f"{f:g}": sum(r[2][k] for r in rows) / m for k, f in enumerate(fractions)
            },
            "mc_se_bound": math.sqrt(cov_bound * (1 - cov_bound) / m),
            "mean_ci_lower": float(np.mean([r[3] for r in rows])),
            "mean_ci_upper": float(np.mean([r[4] for r in rows])),
            "mean_lower_hat": float(np.mean([r[5] for r in rows])),
            "mean_upper_hat": float(np.mean([r[6] for r in rows])),
        }
    report.spec_test_empty_rate = sum(res[1] for res in ok) / m
    return report
