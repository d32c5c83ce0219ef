"""Closed-form sharp bounds for every estimand and assumption row.

All functions take a :class:`JointDistribution` and return plain floats or
:class:`Interval` objects. ``theta_upper`` and friends are deliberately not
clamped, so a negative value signals that the data contradict MTR+MTS.
"""

from __future__ import annotations

from .errors import DegenerateDenominator, InconsistentWithAssumptions, SharesNotCovered
from .model import (
    AssumptionSet,
    Estimand,
    Interval,
    JointDistribution,
    derive,
    validate,
)

DENOM_TOL = 1e-12
# Gaps this small are rounding noise around pc1 == pc0 or a ratio of one.
SIGN_TOL = 1e-12


def _ratio(num: float, den: float, what: str) -> float:
    if den < DENOM_TOL:
        raise DegenerateDenominator(f"{what}: denominator {den!r} below {DENOM_TOL}")
    return num / den


def _capped(num: float, den: float, what: str) -> float:
    return min(_ratio(num, den, what), 1.0)


def theta_upper(dist: JointDistribution) -> float:
    """Upper bound on the average persuasion rate, ``(p1 - p0) / (1 - p0)``."""
    d = derive(dist)
    return _ratio(d.pc1 - d.pc0, 1.0 - d.pc0, "theta_upper")


def theta_r_upper(dist: JointDistribution) -> float:
    """Upper bound on the reverse persuasion rate, ``(p1 - p0) / p1``."""
    d = derive(dist)
    return _ratio(d.pc1 - d.pc0, d.pc1, "theta_r_upper")


def ate_upper(dist: JointDistribution) -> float:
    d = derive(dist)
    return d.pc1 - d.pc0


def shares_bounds(dist: JointDistribution) -> tuple[Interval, Interval, Interval]:
    """Sharp (NP, AP, TP) share intervals under MTR+MTS.

    The caller is responsible for the MTS sign restriction ``p1 >= p0``;
    :func:`sharp_bounds` enforces it.
    """
    d = derive(dist)
    np_ = Interval(1.0 - d.pc1, d.py0)
    ap = Interval(d.pc0, d.py1)
    tp = Interval(0.0, d.pc1 - d.pc0)
    return np_, ap, tp


def mts_only_uppers(dist: JointDistribution) -> dict[Estimand, float]:
    """Upper bounds when only MTS is imposed."""
    dist = validate(dist)
    d = derive(dist)
    diag = dist.p11 + dist.p00
    return {
        Estimand.APR: _capped(d.pc1, diag, "APR"),
        Estimand.R_APR: _capped(1.0 - d.pc0, diag, "R_APR"),
        Estimand.PS: _capped(d.pc1, 1.0 - d.pc0, "PS"),
        Estimand.PN: _capped(1.0 - d.pc0, d.pc1, "PN"),
        Estimand.PNS: min(1.0 - d.pc0, d.pc1),
    }


def sharp_bounds(estimand, assumptions: AssumptionSet, dist: JointDistribution) -> Interval:
    """Sharp identified interval for one estimand under one assumption row.

    Share estimands for NP and AP have closed forms only under MTR+MTS; other
    rows raise SharesNotCovered (use ``oracle.shares_oracle`` there). The TP
    share is PNS by definition and is answered in every row.
    """
    estimand = Estimand(estimand)
    dist = validate(dist)
    d = derive(dist)

    if estimand is Estimand.SHARE_TP:
        estimand = Estimand.PNS

    if assumptions.mtr and assumptions.mts:
        if d.pc1 < d.pc0 - SIGN_TOL:
            raise InconsistentWithAssumptions(
                f"Pr(Y=1|D=1)={d.pc1:.6g} < Pr(Y=1|D=0)={d.pc0:.6g} contradicts MTR+MTS"
            )
        if estimand in (Estimand.APR, Estimand.PS):
            return Interval(0.0, max(theta_upper(dist), 0.0))
        if estimand in (Estimand.R_APR, Estimand.PN):
            return Interval(0.0, max(theta_r_upper(dist), 0.0))
        if estimand in (Estimand.PNS, Estimand.ATE):
            return Interval(0.0, max(ate_upper(dist), 0.0))
        np_, ap, _ = shares_bounds(dist)
        iv = np_ if estimand is Estimand.SHARE_NP else ap
        return Interval(min(iv.lower, iv.upper), iv.upper)

    if estimand.is_share:
        raise SharesNotCovered(
            f"{estimand.value} has no closed form under {assumptions.label}; "
            "use oracle.shares_oracle"
        )

    diag = dist.p11 + dist.p00
    if estimand is Estimand.ATE:
        if assumptions.mtr:
            # ATE equals the TP share under MTR.
            return Interval(0.0, diag)
        # Without MTR the lower end is the worst case -(p10 + p01).
        lower = -(dist.p10 + dist.p01)
        upper = d.pc1 - d.pc0 if assumptions.mts else diag
        return Interval(lower, upper)

    if assumptions.mts:
        return Interval(0.0, mts_only_uppers(dist)[estimand])
    if estimand is Estimand.PNS:
        return Interval(0.0, diag)
    if assumptions.mtr and estimand is Estimand.APR:
        # Treated failures are never-persuadable under MTR.
        return Interval(0.0, diag / (1.0 - dist.p10))
    if assumptions.mtr and estimand is Estimand.R_APR:
        # Untreated successes are already-persuaded under MTR.
        return Interval(0.0, diag / (1.0 - dist.p01))
    return Interval(0.0, 1.0)


def mts_complementarity(dist: JointDistribution) -> bool:
    """MTS alone never bounds both persuasion rates below one at once."""
    ub = mts_only_uppers(dist)
    nontrivial = 1.0 - SIGN_TOL
    return not (ub[Estimand.APR] < nontrivial and ub[Estimand.R_APR] < nontrivial)
