import pytest
from hypothesis import given, settings

from conftest import interior_dists, mts_consistent_dists
from persuasion_bounds import (
    ALL_ROWS,
    MTR_MTS,
    MTR_ONLY,
    MTS_ONLY,
    NO_ASSUMPTIONS,
    BoundaryCell,
    Estimand,
    InconsistentWithAssumptions,
    JointDistribution,
    SharesNotCovered,
    ate_upper,
    derive,
    mts_complementarity,
    mts_only_uppers,
    shares_bounds,
    sharp_bounds,
    theta_r_upper,
    theta_upper,
)
from persuasion_bounds.model import CAUSAL

UNIFORM = JointDistribution(0.25, 0.25, 0.25, 0.25)
ALL_ROW = JointDistribution.from_counts(917, 3642, 1058, 4383)
TABLE = JointDistribution(0.30, 0.10, 0.20, 0.40)


class TestClosedForms:
    def test_theta_upper(self):
        assert theta_upper(TABLE) == pytest.approx(5 / 9, abs=1e-12)
        assert theta_upper(UNIFORM) == 0.0
        assert 100 * theta_upper(ALL_ROW) == pytest.approx(3.37, abs=0.05)

    def test_theta_r_upper(self):
        assert theta_r_upper(TABLE) == pytest.approx(0.625, abs=1e-12)
        assert theta_r_upper(UNIFORM) == 0.0
        assert 100 * theta_r_upper(ALL_ROW) == pytest.approx(0.84, abs=0.05)

    def test_ate_upper(self):
        assert ate_upper(TABLE) == pytest.approx(5 / 12, abs=1e-12)
        assert ate_upper(UNIFORM) == 0.0
        assert 100 * ate_upper(ALL_ROW) == pytest.approx(0.68, abs=0.05)

    def test_negative_allowed(self):
        assert theta_upper(JointDistribution(0.1, 0.4, 0.3, 0.2)) < 0

    def test_boundary_guarded_before_division(self):
        # A zero denominator needs a zero cell, which validation rejects first.
        with pytest.raises(BoundaryCell):
            theta_upper(JointDistribution(0.0, 0.5, 0.25, 0.25))

    def test_rounding_level_sign_tolerated(self):
        dist = JointDistribution.from_conditionals(0.8125, 0.8125, 0.3)
        assert sharp_bounds(Estimand.APR, MTR_MTS, dist).upper == pytest.approx(0.0, abs=1e-12)


class TestShares:
    def test_table(self):
        np_, ap, tp = shares_bounds(TABLE)
        assert (np_.lower, np_.upper) == pytest.approx((1 / 3, 0.5), abs=1e-12)
        assert (ap.lower, ap.upper) == pytest.approx((0.25, 0.5), abs=1e-12)
        assert (tp.lower, tp.upper) == pytest.approx((0.0, 5 / 12), abs=1e-12)

    def test_uniform_point_identified(self):
        np_, ap, tp = shares_bounds(UNIFORM)
        assert (np_.lower, np_.upper, ap.lower, ap.upper, tp.upper) == (0.5, 0.5, 0.5, 0.5, 0.0)

    def test_all_row(self):
        np_, ap, _ = shares_bounds(ALL_ROW)
        assert (np_.lower, np_.upper) == pytest.approx((0.1944, 0.1975), abs=1e-4)
        assert (ap.lower, ap.upper) == pytest.approx((0.7988, 0.8025), abs=1e-4)

    @given(mts_consistent_dists())
    def test_endpoint_identity(self, dist):
        np_, ap, tp = shares_bounds(dist)
        assert np_.lower + ap.lower + tp.upper == pytest.approx(1.0, abs=1e-12)


class TestSharpBounds:
    @given(interior_dists())
    def test_no_assumptions_trivial(self, dist):
        for e in (Estimand.APR, Estimand.R_APR, Estimand.PS, Estimand.PN):
            iv = sharp_bounds(e, NO_ASSUMPTIONS, dist)
            assert (iv.lower, iv.upper) == (0.0, 1.0)
        assert sharp_bounds(Estimand.PNS, NO_ASSUMPTIONS, dist).upper == pytest.approx(
            dist.p11 + dist.p00, abs=1e-15)

    def test_mts_only_table(self):
        expect = {Estimand.APR: 20 / 21, Estimand.R_APR: 1.0, Estimand.PNS: 2 / 3,
                  Estimand.PS: 8 / 9, Estimand.PN: 1.0}
        for e, ub in expect.items():
            iv = sharp_bounds(e, MTS_ONLY, TABLE)
            assert iv.lower == 0.0
            assert iv.upper == pytest.approx(ub, abs=1e-12)

    def test_pns_none(self):
        assert sharp_bounds(Estimand.PNS, NO_ASSUMPTIONS, TABLE).upper == pytest.approx(0.7)

    def test_mtr_only(self):
        # Under MTR treated failures are NP and untreated successes AP.
        assert sharp_bounds(Estimand.APR, MTR_ONLY, TABLE).upper == pytest.approx(0.7 / 0.9)
        assert sharp_bounds(Estimand.R_APR, MTR_ONLY, TABLE).upper == pytest.approx(0.7 / 0.8)
        for e in (Estimand.PS, Estimand.PN):
            assert sharp_bounds(e, MTR_ONLY, TABLE).upper == 1.0
        assert sharp_bounds(Estimand.PNS, MTR_ONLY, TABLE).upper == pytest.approx(0.7)

    def test_ate_rows(self):
        assert tuple(sharp_bounds(Estimand.ATE, NO_ASSUMPTIONS, TABLE)) == pytest.approx((-0.3, 0.7))
        assert tuple(sharp_bounds(Estimand.ATE, MTS_ONLY, TABLE)) == pytest.approx((-0.3, 5 / 12))
        assert tuple(sharp_bounds(Estimand.ATE, MTR_ONLY, TABLE)) == pytest.approx((0.0, 0.7))
        assert tuple(sharp_bounds(Estimand.ATE, MTR_MTS, TABLE)) == pytest.approx((0.0, 5 / 12))

    def test_mtr_mts_dispatch(self):
        assert sharp_bounds(Estimand.APR, MTR_MTS, TABLE).upper == theta_upper(TABLE)
        assert sharp_bounds(Estimand.PS, MTR_MTS, TABLE).upper == theta_upper(TABLE)
        assert sharp_bounds(Estimand.R_APR, MTR_MTS, TABLE).upper == theta_r_upper(TABLE)
        assert sharp_bounds(Estimand.PN, MTR_MTS, TABLE).upper == theta_r_upper(TABLE)
        assert sharp_bounds(Estimand.SHARE_TP, MTR_MTS, TABLE).upper == ate_upper(TABLE)

    def test_inconsistent(self):
        with pytest.raises(InconsistentWithAssumptions):
            sharp_bounds(Estimand.APR, MTR_MTS, JointDistribution(0.1, 0.4, 0.3, 0.2))

    @pytest.mark.parametrize("row", [NO_ASSUMPTIONS, MTR_ONLY, MTS_ONLY])
    def test_shares_not_covered(self, row):
        for e in (Estimand.SHARE_NP, Estimand.SHARE_AP):
            with pytest.raises(SharesNotCovered):
                sharp_bounds(e, row, TABLE)
        assert sharp_bounds(Estimand.SHARE_TP, row, TABLE) == sharp_bounds(Estimand.PNS, row, TABLE)

    @given(mts_consistent_dists())
    def test_dominance(self, dist):
        for e in CAUSAL:
            full = sharp_bounds(e, MTR_MTS, dist).upper
            mts = sharp_bounds(e, MTS_ONLY, dist).upper
            mtr = sharp_bounds(e, MTR_ONLY, dist).upper
            none = sharp_bounds(e, NO_ASSUMPTIONS, dist).upper
            assert full <= mts + 1e-12
            assert mts <= none + 1e-12
            assert mtr <= none + 1e-12

    @given(mts_consistent_dists())
    def test_range(self, dist):
        for row in ALL_ROWS:
            for e in CAUSAL:
                iv = sharp_bounds(e, row, dist)
                assert iv.lower == 0.0
                assert 0.0 <= iv.upper <= 1.0

    @given(mts_consistent_dists())
    def test_ps_pn_equal_persuasion_rates(self, dist):
        # Rounding-level negatives are clipped to zero in the population bound.
        assert sharp_bounds(Estimand.PS, MTR_MTS, dist).upper == max(theta_upper(dist), 0.0)
        assert sharp_bounds(Estimand.PN, MTR_MTS, dist).upper == max(theta_r_upper(dist), 0.0)

    @given(interior_dists())
    def test_mts_ps_pn_exogeneity_form(self, dist):
        d = derive(dist)
        ub = mts_only_uppers(dist)
        assert ub[Estimand.PS] == min(d.pc1 / (1 - d.pc0), 1.0)
        assert ub[Estimand.PN] == min((1 - d.pc0) / d.pc1, 1.0)


class TestComplementarity:
    def test_examples(self):
        ub = mts_only_uppers(TABLE)
        assert ub[Estimand.APR] == pytest.approx(0.9524, abs=1e-4)
        assert ub[Estimand.R_APR] == 1.0
        assert mts_complementarity(TABLE)
        assert mts_complementarity(UNIFORM)
        assert mts_complementarity(ALL_ROW)

    @settings(max_examples=300)
    @given(interior_dists(min_cell=1e-4))
    def test_always(self, dist):
        assert mts_complementarity(dist)
