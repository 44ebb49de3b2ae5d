import pytest
from hypothesis import given, strategies as st

from strawsim.device import Device, ReliabilityConfig, WlGroup
from strawsim.disturbance import (DEFAULT_RPT_ENTRIES, Rpt, RptError,
                                  alpha_to_tenths, effective_read_count,
                                  erc_tenths, is_heavily_disturbed)
from strawsim.geometry import Geometry


class TestErc:
    def test_published_worst_case_product(self):
        # 54,560 adjacent reads at rate 8.7 consume exactly a 474,672 budget
        assert effective_read_count(54_560, 0, 8.7) == 474_672
        assert erc_tenths(54_560, 0, 87) == 4_746_720

    def test_weighted_sum(self):
        assert effective_read_count(10, 100, 8.4) == 184
        assert effective_read_count(0, 7, 9.0) == 7
        assert effective_read_count(3, 0, 8.4) == 25   # 25.2 floored

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            effective_read_count(-1, 0, 8.4)
        with pytest.raises(ValueError):
            erc_tenths(0, -1, 84)

    @given(st.integers(0, 10**6), st.integers(0, 10**6),
           st.integers(0, 10**6), st.integers(0, 10**6),
           st.integers(10, 120))
    def test_tenths_form_is_linear(self, a1, n1, a2, n2, at):
        assert (erc_tenths(a1 + a2, n1 + n2, at)
                == erc_tenths(a1, n1, at) + erc_tenths(a2, n2, at))

    @given(st.integers(0, 10**6), st.integers(0, 10**6),
           st.integers(10, 120))
    def test_floor_form_brackets_tenths(self, r_adj, r_nonadj, at):
        erc = effective_read_count(r_adj, r_nonadj, at / 10.0)
        assert 10 * erc <= erc_tenths(r_adj, r_nonadj, at) < 10 * (erc + 1)


class TestDisturbanceCheck:
    def test_threshold_with_headroom(self):
        # one check interval of worst-case adjacent stress is added before
        # comparing against the budget
        assert not is_heavily_disturbed(465_971, 474_672, 8.7, 1000)
        assert is_heavily_disturbed(465_972, 474_672, 8.7, 1000)

    def test_zero_interval_is_exact_budget_check(self):
        assert not is_heavily_disturbed(474_671, 474_672, 8.7, 0)
        assert is_heavily_disturbed(474_672, 474_672, 8.7, 0)

    @given(st.integers(0, 10**7), st.integers(1, 10**7),
           st.integers(10, 120), st.integers(0, 10**4))
    def test_monotone_in_erc(self, erc, erc_max, at, interval):
        alpha = at / 10.0
        if is_heavily_disturbed(erc, erc_max, alpha, interval):
            assert is_heavily_disturbed(erc + 1, erc_max, alpha, interval)


class TestRpt:
    def test_default_table_published_anchors(self):
        rpt = Rpt.from_entries(DEFAULT_RPT_ENTRIES)
        assert rpt.lookup(2000, WlGroup.GOOD) == (767_000, 9.0)
        assert rpt.lookup(2000, WlGroup.BEST)[1] == 8.7
        assert rpt.lookup(2000, WlGroup.WORST) == (474_672, 8.7)

    def test_bucket_selection(self):
        rpt = Rpt.from_entries(DEFAULT_RPT_ENTRIES)
        assert rpt.lookup_entry(0, WlGroup.BEST).pec_bucket == 1000
        assert rpt.lookup_entry(1000, WlGroup.BEST).pec_bucket == 1000
        assert rpt.lookup_entry(1001, WlGroup.BEST).pec_bucket == 2000
        # beyond the last bucket, clamp to it
        assert rpt.lookup_entry(50_000, WlGroup.BEST).pec_bucket == 2000
        with pytest.raises(RptError):
            rpt.lookup_entry(-1, WlGroup.BEST)

    def test_rejects_group_order_violation(self):
        bad = [dict(e) for e in DEFAULT_RPT_ENTRIES]
        for e in bad:
            if e["pec_bucket"] == 2000 and e["group"] == "Worst":
                e["erc_max"] = 900_000   # above Bad
        with pytest.raises(RptError, match="non-increasing"):
            Rpt.from_entries(bad)

    def test_rejects_bucket_order_violation(self):
        bad = [dict(e) for e in DEFAULT_RPT_ENTRIES]
        for e in bad:
            if e["pec_bucket"] == 2000 and e["group"] == "Best":
                e["erc_max"] = 2_000_000   # above the 1K-bucket value
        with pytest.raises(RptError, match="across PEC buckets"):
            Rpt.from_entries(bad)

    def test_rejects_missing_group_and_duplicates(self):
        with pytest.raises(RptError, match="missing group"):
            Rpt.from_entries(DEFAULT_RPT_ENTRIES[:7])
        with pytest.raises(RptError, match="duplicate"):
            Rpt.from_entries(DEFAULT_RPT_ENTRIES + [DEFAULT_RPT_ENTRIES[0]])

    def test_rejects_alpha_below_one(self):
        with pytest.raises(RptError, match="alpha"):
            alpha_to_tenths(0.9)

    def test_config_round_trip(self):
        rpt = Rpt.from_entries(DEFAULT_RPT_ENTRIES)
        again = Rpt.from_entries(rpt.to_config_entries())
        assert again.to_config_entries() == rpt.to_config_entries()

    def test_largest_bucket_entries(self):
        rpt = Rpt.from_entries(DEFAULT_RPT_ENTRIES)
        entries = rpt.largest_bucket_entries()
        assert [e.pec_bucket for e in entries] == [2000] * 4
        assert [e.group for e in entries] == list(WlGroup)


class TestDerivedRpt:
    @pytest.fixture
    def small_device(self):
        geom = Geometry(channels=1, dies_per_channel=1, planes_per_die=1,
                        blocks_per_plane=4, wls_per_block=48, pages_per_wl=1)
        rel = ReliabilityConfig(tolerance_min=4030, tolerance_max=9620)
        return Device(geom, rel, seed=5)

    def test_budgets_are_safe_bounds(self, small_device):
        """Every derived budget undercuts every real tolerance of its group,
        and every derived rate covers every real rate."""
        rpt = Rpt.derive_from_device(small_device, margin=0.95)
        for bucket, factor in small_device.rel.pec_degradation.items():
            for bt in small_device.blocks:
                for g in WlGroup:
                    mask = bt.group == g
                    entry = rpt.lookup_entry(bucket, g)
                    real_tol = (bt.base_tol[mask] * factor).astype(int)
                    assert entry.erc_max <= real_tol.min()
                    assert entry.alpha_tenths >= bt.alpha_tenths[mask].max()

    def test_margin_validation(self, small_device):
        with pytest.raises(RptError, match="margin"):
            Rpt.derive_from_device(small_device, margin=0.0)
        with pytest.raises(RptError, match="margin"):
            Rpt.derive_from_device(small_device, margin=1.5)

    def test_group_budget_ordering_holds(self, small_device):
        rpt = Rpt.derive_from_device(small_device)
        for bucket in rpt.buckets:
            vals = [rpt.lookup_entry(bucket, g).erc_max for g in WlGroup]
            assert vals == sorted(vals, reverse=True)
