"""Domain types for a binary outcome Y and a binary treatment D.

Cells are indexed ``p_yd = Pr(Y=y, D=d)``, so ``p10`` is the untreated
success cell and ``p01`` the treated failure cell.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .errors import BoundaryCell, NotADistribution

SUM_TOL = 1e-12
INTERIOR_TOL = 1e-9


@dataclass(frozen=True)
class JointDistribution:
    """Joint law of (Y, D) given by its four cell probabilities."""

    p00: float
    p10: float
    p01: float
    p11: float

    def __post_init__(self):
        cells = []
        for name in ("p00", "p10", "p01", "p11"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            cells.append(value)
        if not all(math.isfinite(c) for c in cells):
            raise NotADistribution(f"non-finite cell in {cells}")
        if min(cells) < 0.0:
            raise NotADistribution(f"negative cell in {cells}")
        if abs(math.fsum(cells) - 1.0) > SUM_TOL:
            raise NotADistribution(f"cells sum to {math.fsum(cells)!r}, not 1")

    @classmethod
    def from_counts(cls, n00, n10, n01, n11) -> "JointDistribution":
        """Normalize (possibly weighted) cell counts.

        Integer and rational counts are normalized exactly before the
        conversion to float.
        """
        counts = [Fraction(c) for c in (n00, n10, n01, n11)]
        total = sum(counts)
        if total <= 0 or min(counts) < 0:
            raise NotADistribution(f"invalid counts {(n00, n10, n01, n11)}")
        return cls(*(float(c / total) for c in counts))

    @classmethod
    def from_conditionals(cls, p0: float, p1: float, q1: float) -> "JointDistribution":
        """Build cells from ``Pr(Y=1|D=0)``, ``Pr(Y=1|D=1)`` and ``Pr(D=1)``."""
        for v in (p0, p1, q1):
            if not 0.0 <= v <= 1.0:
                raise NotADistribution(f"conditional {v} outside [0, 1]")
        q0 = 1.0 - q1
        return cls(q0 * (1.0 - p0), q0 * p0, q1 * (1.0 - p1), q1 * p1)

    def cells(self) -> tuple[float, float, float, float]:
        return (self.p00, self.p10, self.p01, self.p11)

    def is_interior(self) -> bool:
        return min(self.cells()) >= INTERIOR_TOL


@dataclass(frozen=True)
class DerivedProbs:
    q0: float
    q1: float
    pc0: float
    pc1: float
    py1: float

    @property
    def py0(self) -> float:
        return 1.0 - self.py1


class Estimand(str, enum.Enum):
    APR = "APR"
    R_APR = "R_APR"
    PS = "PS"
    PN = "PN"
    PNS = "PNS"
    ATE = "ATE"
    SHARE_NP = "SHARE_NP"
    SHARE_AP = "SHARE_AP"
    SHARE_TP = "SHARE_TP"

    @classmethod
    def parse(cls, text: str) -> "Estimand":
        key = text.strip().upper().replace("-", "_")
        aliases = {"THETA": "APR", "RAPR": "R_APR", "NP": "SHARE_NP",
                   "AP": "SHARE_AP", "TP": "SHARE_TP"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown estimand {text!r}") from None

    @property
    def is_share(self) -> bool:
        return self in SHARES


CAUSAL = (Estimand.APR, Estimand.R_APR, Estimand.PS, Estimand.PN, Estimand.PNS)
SHARES = (Estimand.SHARE_NP, Estimand.SHARE_AP, Estimand.SHARE_TP)


@dataclass(frozen=True)
class AssumptionSet:
    mtr: bool = True
    mts: bool = True

    @property
    def label(self) -> str:
        if self.mtr and self.mts:
            return "mtr+mts"
        if self.mtr:
            return "mtr"
        if self.mts:
            return "mts"
        return "none"

    @classmethod
    def parse(cls, text: str) -> "AssumptionSet":
        parts = {p for p in text.strip().lower().replace(",", "+").split("+") if p}
        if parts == {"none"} or not parts:
            return cls(False, False)
        if not parts <= {"mtr", "mts"}:
            raise ValueError(f"unknown assumption set {text!r}")
        return cls("mtr" in parts, "mts" in parts)

    def __str__(self) -> str:
        return self.label


NO_ASSUMPTIONS = AssumptionSet(False, False)
MTR_ONLY = AssumptionSet(True, False)
MTS_ONLY = AssumptionSet(False, True)
MTR_MTS = AssumptionSet(True, True)
ALL_ROWS = (NO_ASSUMPTIONS, MTR_ONLY, MTS_ONLY, MTR_MTS)


@dataclass(frozen=True)
class Interval:
    """Closed interval; an empty confidence set has ``empty=True`` and NaN ends."""

    lower: float
    upper: float
    kind: str = "identified_set"
    alpha: Optional[float] = None
    empty: bool = False

    def __post_init__(self):
        if self.kind not in ("identified_set", "confidence"):
            raise ValueError(f"unknown interval kind {self.kind!r}")
        if self.empty and self.kind != "confidence":
            raise ValueError("only confidence sets may be empty")

    @classmethod
    def empty_confidence(cls, alpha: float) -> "Interval":
        return cls(math.nan, math.nan, "confidence", alpha, empty=True)

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.upper - self.lower

    def contains(self, value: float, tol: float = 0.0) -> bool:
        if self.empty:
            return False
        return self.lower - tol <= value <= self.upper + tol

    def __iter__(self):
        yield self.lower
        yield self.upper


@dataclass(frozen=True)
class TypeShares:
    np: float
    ap: float
    tp: float

    def __post_init__(self):
        if min(self.np, self.ap, self.tp) < 0:
            raise ValueError("type shares must be nonnegative")
        if abs(self.np + self.ap + self.tp - 1.0) > SUM_TOL:
            raise ValueError("type shares must sum to one")


DistLike = Union[JointDistribution, Iterable[float]]


def validate(dist: DistLike, require_interior: bool = True) -> JointDistribution:
    """Check that ``dist`` is a distribution and, optionally, interior.

    Raises NotADistribution for bad sums or negative cells and BoundaryCell
    when an interior distribution is required but a cell is below 1e-9.
    """
    if not isinstance(dist, JointDistribution):
        dist = JointDistribution(*dist)
    if require_interior and not dist.is_interior():
        raise BoundaryCell(f"cell below {INTERIOR_TOL}: {dist.cells()}")
    return dist


def derive(dist: JointDistribution) -> DerivedProbs:
    dist = validate(dist)
    q0 = dist.p00 + dist.p10
    q1 = dist.p01 + dist.p11
    return DerivedProbs(
        q0=q0,
        q1=q1,
        pc0=dist.p10 / q0,
        pc1=dist.p11 / q1,
        py1=dist.p10 + dist.p11,
    )
