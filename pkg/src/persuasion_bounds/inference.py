"""Confidence sets for the bound parameters and the normal kernels they use."""

from __future__ import annotations

import math
from statistics import NormalDist

from .errors import DomainError, NoRoot
from .model import Interval

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_STD = NormalDist()
STOYE_BRACKET = (0.0, 6.0)
STOYE_TOL = 1e-12


def norm_cdf(x: float) -> float:
    """Standard normal CDF with both tails computed from ``erfc``."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("norm_cdf of NaN")
    if x < 0.0:
        return 0.5 * math.erfc(-x / _SQRT2)
    return 1.0 - 0.5 * math.erfc(x / _SQRT2)


def norm_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_quantile(p: float) -> float:
    """Inverse of :func:`norm_cdf` on (0, 1).

    Starts from the stdlib rational approximation and polishes with Newton
    steps against ``norm_cdf`` so the pair round-trips.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile level {p!r} outside (0, 1)")
    x = _STD.inv_cdf(p)
    for _ in range(2):
        # Work in the smaller tail to avoid cancellation near p = 1.
        if p > 0.5:
            resid = (1.0 - p) - 0.5 * math.erfc(x / _SQRT2)
            x = x - resid / norm_pdf(x)
        else:
            x = x - (norm_cdf(x) - p) / norm_pdf(x)
    return x


def _critical(alpha: float) -> float:
    if not 0.0 < alpha <= 0.5:
        raise DomainError(f"alpha {alpha!r} outside (0, 0.5]")
    return norm_quantile(1.0 - alpha)


def one_sided_ci(est, alpha: float = 0.05) -> Interval:
    """``[0, upper_hat + z_{1-alpha} * se_upper]`` for a bound whose lower end is 0."""
    c = _critical(alpha)
    return Interval(0.0, est.upper_hat + c * est.se_upper, "confidence", alpha)


def spec_test_ci(est, alpha: float = 0.05) -> Interval:
    """One-sided interval that is empty when the data reject ``upper >= 0``."""
    ci = one_sided_ci(est, alpha)
    if ci.upper < 0.0:
        return Interval.empty_confidence(alpha)
    return ci


def _stoye_lhs(c: float, ratio: float) -> float:
    return norm_cdf(c + ratio) - norm_cdf(-c)


def stoye_critical(delta_hat: float, se_l: float, se_u: float, alpha: float = 0.05) -> float:
    """Critical value for an interval-identified parameter.

    Solves ``Phi(c + delta/max(se_l, se_u)) - Phi(-c) = 1 - alpha`` for
    ``c`` by bisection. The solution lies between ``z_{1-alpha}`` (wide
    set) and ``z_{1-alpha/2}`` (point identified).
    """
    if not 0.0 < alpha < 0.5:
        raise DomainError(f"alpha {alpha!r} outside (0, 0.5)")
    if delta_hat < 0 or se_l < 0 or se_u < 0:
        raise DomainError("length and standard errors must be nonnegative")
    scale = max(se_l, se_u)
    if scale > 0.0:
        ratio = delta_hat / scale
    else:
        ratio = 0.0 if delta_hat == 0.0 else math.inf
    if math.isinf(ratio):
        return norm_quantile(1.0 - alpha)

    target = 1.0 - alpha
    lo, hi = STOYE_BRACKET
    f_lo, f_hi = _stoye_lhs(lo, ratio) - target, _stoye_lhs(hi, ratio) - target
    if f_lo > 0.0 or f_hi < 0.0:
        raise NoRoot(f"cannot bracket the critical value for ratio {ratio!r}")
    while hi - lo > STOYE_TOL:
        mid = 0.5 * (lo + hi)
        if _stoye_lhs(mid, ratio) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def stoye_ci(est, alpha: float = 0.05, clamp=(0.0, 1.0)) -> Interval:
    """Interval covering the true parameter when both ends are estimated."""
    delta = max(est.upper_hat - est.lower_hat, 0.0)
    c = stoye_critical(delta, est.se_lower, est.se_upper, alpha)
    lower = est.lower_hat - c * est.se_lower
    upper = est.upper_hat + c * est.se_upper
    if clamp is not None:
        lower = max(lower, clamp[0])
        upper = min(upper, clamp[1])
    return Interval(lower, upper, "confidence", alpha)


def shares_ci(est, alpha: float = 0.05) -> Interval:
    """Confidence interval for the AP or NP share, clamped to [0, 1]."""
    return stoye_ci(est, alpha, clamp=(0.0, 1.0))


def two_sided_ci(est, alpha: float = 0.05) -> Interval:
    """Symmetric interval around ``upper_hat``, for the point-identified case."""
    c = _critical(alpha / 2.0)
    half = c * est.se_upper
    return Interval(est.upper_hat - half, est.upper_hat + half, "confidence", alpha)
