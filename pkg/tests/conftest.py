import numpy as np
import pytest
from hypothesis import strategies as st

from persuasion_bounds import JointDistribution


def _normalize(raw):
    total = sum(raw)
    cells = [r / total for r in raw]
    # Push the rounding residue into the largest cell so the sum is exact enough.
    k = int(np.argmax(cells))
    cells[k] = 1.0 - sum(c for i, c in enumerate(cells) if i != k)
    return JointDistribution(*cells)


@st.composite
def interior_dists(draw, min_cell=0.01):
    raw = [draw(st.floats(min_cell, 1.0)) for _ in range(4)]
    dist = _normalize(raw)
    if min(dist.cells()) < 1e-6:
        dist = _normalize([c + 1e-3 for c in dist.cells()])
    return dist


@st.composite
def mts_consistent_dists(draw):
    """Interior distributions with Pr(Y=1|D=1) >= Pr(Y=1|D=0)."""
    p0 = draw(st.floats(0.02, 0.97))
    p1 = draw(st.floats(p0, 0.98))
    q1 = draw(st.floats(0.02, 0.98))
    return JointDistribution.from_conditionals(p0, p1, q1)


def random_dists(rng, k, consistent=True):
    out = []
    while len(out) < k:
        raw = rng.dirichlet(np.ones(4))
        if raw.min() < 0.005:
            continue
        dist = _normalize(list(raw))
        pc0 = dist.p10 / (dist.p00 + dist.p10)
        pc1 = dist.p11 / (dist.p01 + dist.p11)
        if consistent and pc1 < pc0:
            continue
        out.append(dist)
    return out


@pytest.fixture
def table_dist():
    return JointDistribution(0.30, 0.10, 0.20, 0.40)
