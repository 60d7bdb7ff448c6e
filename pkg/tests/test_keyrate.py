"""Secret-key-rate calculator tests: entropy identities, thresholds,
operating-point bisection, and sweep structure."""

import math

import numpy as np
import pytest

from qghz.keyrate import (
    ChannelStats,
    choose_p,
    entropy_d,
    rate_sweep,
    secret_fraction,
    stats_from_state,
    total_rate,
)
from qghz.loss_analytics import w_fidelity_loss
from qghz.model import EmitterArrayConfig


class TestEntropy:
    def test_boundaries(self):
        for d in (2, 3, 5):
            assert entropy_d(0.0, d) == 0.0
            assert entropy_d(1.0, d) == pytest.approx(math.log2(d - 1) if d > 2 else 0.0)

    def test_maximum_at_full_mixing(self):
        """h_d peaks at Q = (d-1)/d with value log2 d."""
        for d in (2, 3, 5):
            q_star = (d - 1) / d
            assert entropy_d(q_star, d) == pytest.approx(math.log2(d))
            for dq in (-0.05, 0.05):
                assert entropy_d(q_star + dq, d) < math.log2(d)

    def test_binary_case_is_shannon(self):
        q = 0.11
        h = -q * math.log2(q) - (1 - q) * math.log2(1 - q)
        assert entropy_d(q, 2) == pytest.approx(h)


class TestSecretFraction:
    def test_perfect_state(self):
        for d in (2, 3, 5):
            stats = ChannelStats(Q_z=0.0, Q_x=0.0)
            assert secret_fraction(d, stats) == pytest.approx(math.log2(d))

    def test_bb84_eleven_percent_threshold(self):
        """The symmetric-error zero crossing sits at Q ~ 11% for d=2."""

        def K(q):
            return math.log2(2) - 2 * entropy_d(q, 2)

        lo, hi = 0.05, 0.2
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if K(mid) > 0:
                lo = mid
            else:
                hi = mid
        q_root = 0.5 * (lo + hi)
        assert q_root == pytest.approx(0.1100, abs=5e-4)
        assert secret_fraction(2, ChannelStats(Q_z=0.12, Q_x=0.12)) == 0.0

    def test_monotone_in_errors(self):
        base = secret_fraction(3, ChannelStats(Q_z=0.05, Q_x=0.05))
        worse = secret_fraction(3, ChannelStats(Q_z=0.08, Q_x=0.05))
        assert worse < base

    def test_higher_d_survives_where_qubit_fails(self):
        q = 0.13
        assert secret_fraction(2, ChannelStats(Q_z=q, Q_x=q)) == 0.0
        assert secret_fraction(5, ChannelStats(Q_z=q, Q_x=q)) > 0.0


class TestStatsFromState:
    def test_perfect_fidelity(self):
        s = stats_from_state(1.0, 3, "depolarizing-like")
        assert s.Q_z == 0.0 and s.Q_x == 0.0

    def test_depolarizing_d2(self):
        s = stats_from_state(0.5, 2, "depolarizing-like")
        assert s.Q_z == pytest.approx(0.25)
        assert s.Q_x == pytest.approx(0.25)

    def test_dephasing_like_loads_only_qx(self):
        s = stats_from_state(0.9, 3, "dephasing-like")
        assert s.Q_z == 0.0
        assert s.Q_x == pytest.approx(0.1 * 2 / 3)

    def test_unknown_shape(self):
        with pytest.raises(ValueError, match="noise shape"):
            stats_from_state(0.9, 3, "thermal")


class TestChooseP:
    def test_matches_fine_grid_scan(self):
        d, eta1, target = 3, 0.9, 0.95
        p_star = choose_p(d, eta1, target)
        assert p_star is not None
        assert w_fidelity_loss(d, p_star, eta1) == pytest.approx(target, abs=1e-8)
        # Fine grid: the crossing lies in the same 1e-4 cell.
        grid = np.linspace(1e-4, 0.9, 9000)
        vals = [w_fidelity_loss(d, p, eta1) for p in grid]
        idx = int(np.searchsorted(-np.asarray(vals), -target))
        assert abs(grid[idx] - p_star) < 2e-4

    def test_unreachable_target(self):
        # Perfect fidelity is unreachable at any p > 0 once eta1 < 1
        # (false-herald weight vanishes only in the p -> 0 limit).
        assert choose_p(5, 0.1, 1.0) is None
        assert choose_p(3, 1.0, 1.0) is not None


class TestTotalRate:
    CONFIG = EmitterArrayConfig.uniform(
        5, 0.056, dephasing_rate=0.0088, eta1=0.53, eta2=0.53
    )

    def test_reference_operating_point(self):
        rate, row = total_rate(self.CONFIG, pump_rate=76e6)
        assert 0.975e6 <= rate <= 1.625e6  # 1.3 Mbps +/- 25%
        assert row.K > 0

    def test_rate_vanishes_without_transmission(self):
        config = self.CONFIG.with_(eta2=1e-6)
        rate, _ = total_rate(config, pump_rate=76e6)
        assert rate < 1.0

    def test_scales_linearly_with_pump(self):
        r1, _ = total_rate(self.CONFIG, pump_rate=1e6)
        r2, _ = total_rate(self.CONFIG, pump_rate=2e6)
        assert r2 == pytest.approx(2 * r1, rel=1e-12)

    def test_rejects_bad_pump(self):
        with pytest.raises(ValueError):
            total_rate(self.CONFIG, pump_rate=0.0)


class TestRateSweep:
    def _sweep(self, gamma):
        template = EmitterArrayConfig.uniform(
            2, 0.1, dephasing_rate=gamma, eta1=0.9
        )
        eta2s = np.linspace(0.02, 1.0, 50)
        return rate_sweep(template, eta2s, [2, 3, 4, 5], 0.95)

    def test_row_structure(self):
        rows = self._sweep(0.0)
        assert len(rows) == 4 * 50
        for r in rows:
            assert r.reachable
            assert r.F_W == pytest.approx(0.95, abs=1e-8)

    def test_higher_d_gives_higher_rate(self):
        rows = self._sweep(0.0)
        at_eta = {
            d: next(r.RK_over_Rpi for r in rows if r.d == d and abs(r.eta2 - 0.9) < 0.011)
            for d in (2, 3, 4, 5)
        }
        assert at_eta[2] < at_eta[3] < at_eta[4] < at_eta[5]

    def test_dephasing_kills_qubit_rate_first(self):
        """gamma = 0.01: the d=2 curve dies at a strictly larger eta2
        than the d=5 curve."""
        rows = self._sweep(0.01)

        def last_zero(d):
            return max(r.eta2 for r in rows if r.d == d and r.RK_over_Rpi <= 0)

        assert last_zero(2) > last_zero(5)

    def test_deterministic(self):
        a = self._sweep(0.01)
        b = self._sweep(0.01)
        assert a == b

    def test_unreachable_rows_flagged(self):
        template = EmitterArrayConfig.uniform(2, 0.1, eta1=0.1)
        rows = rate_sweep(template, [0.5], [5], 1.0)
        assert len(rows) == 1
        assert not rows[0].reachable
        assert rows[0].RK_over_Rpi == 0.0
