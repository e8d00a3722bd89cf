import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fronthaulsim.config import SystemParams
from fronthaulsim.precoding import (
    MseWeights,
    PrecodingError,
    bisect_mu,
    conventional_weights,
    default_precoder_init,
    modified_wmmse,
    sum_rate_wmmse,
    total_power,
    waterfill_powers,
    waterfilling,
    wmmse_weights,
)
from fronthaulsim.rates import (
    EffectiveChannels,
    lagrangian_bpshz,
    mmse_equalizer,
    mse_matrix,
    rate_bpshz,
)

from conftest import crandn


def random_eff(rng, n_cpu=3, n_ap=3, scale=1e-5):
    return EffectiveChannels(
        crandn(rng, n_cpu, n_ap) * scale, crandn(rng, n_ap, n_ap) * scale
    )


def random_pair_on_budget(rng, n, power):
    w1 = crandn(rng, n, n)
    w2 = crandn(rng, n, n)
    factor = np.sqrt(power / total_power(w1, w2))
    return w1 * factor, w2 * factor


class TestWaterfillPowers:
    def test_single_channel_takes_full_budget(self):
        np.testing.assert_allclose(waterfill_powers(np.array([2.0]), 3.0), [3.0])

    def test_equal_gains_split_evenly(self):
        np.testing.assert_allclose(
            waterfill_powers(np.array([1.0, 1.0, 1.0]), 6.0), [2.0, 2.0, 2.0]
        )

    def test_two_channel_hand_example(self):
        # gains 1 and 1/3, budget 1: level = (1 + 1 + 3)/2 = 2.5 puts the
        # weak channel below water only if 2.5 - 3 < 0, so it is dropped.
        got = waterfill_powers(np.array([1.0, 1.0 / 3.0]), 1.0)
        np.testing.assert_allclose(got, [1.0, 0.0])

    def test_two_channel_both_active(self):
        got = waterfill_powers(np.array([1.0, 0.5]), 4.0)
        # level = (4 + 1 + 2)/2 = 3.5 -> powers 2.5 and 1.5.
        np.testing.assert_allclose(got, [2.5, 1.5])

    @given(
        st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=1, max_size=8),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    @settings(max_examples=100, deadline=None)
    def test_budget_and_nonnegativity(self, gains, budget):
        p = waterfill_powers(np.array(gains), budget)
        assert np.all(p >= 0)
        assert np.sum(p) == pytest.approx(budget, rel=1e-9)

    def test_zero_gains_get_nothing(self):
        got = waterfill_powers(np.array([0.0, 2.0, 0.0]), 5.0)
        assert got[0] == 0.0 and got[2] == 0.0
        assert got[1] == pytest.approx(5.0)


class TestWaterfilling:
    def test_beats_random_precoders(self):
        # Optimality oracle: no random unit-budget precoder on 20 channels
        # does better out of 1000 tries each.
        p = SystemParams(n_ap=3, n_cpu=2, m_ris=4)
        rng = np.random.default_rng(20)
        power = p.power_budget_w
        for _ in range(20):
            eff = random_eff(rng, 2, 3)
            pair = waterfilling(eff.h1, power, p)
            best = rate_bpshz(1, eff, pair.w1, pair.w2, p)
            assert pair.total_power <= power * (1 + 1e-9)
            for _ in range(1000):
                w1 = crandn(rng, 3, 3)
                w1 *= np.sqrt(power / total_power(w1, np.zeros_like(w1)))
                assert rate_bpshz(1, eff, w1, pair.w2, p) <= best * (1 + 1e-9)

    def test_secondary_precoder_is_zero(self):
        p = SystemParams(n_ap=3, n_cpu=2, m_ris=4)
        rng = np.random.default_rng(21)
        pair = waterfilling(crandn(rng, 2, 3), p.power_budget_w, p)
        assert not np.any(pair.w2)

    def test_all_zero_channel_gives_zero_precoder(self):
        p = SystemParams(n_ap=3, n_cpu=2, m_ris=4)
        pair = waterfilling(np.zeros((2, 3), dtype=complex), p.power_budget_w, p)
        assert not np.any(pair.w1)


class TestWeights:
    def test_rejects_lambda_below_one(self):
        with pytest.raises(PrecodingError):
            wmmse_weights(0.5, np.eye(2, dtype=complex), np.eye(2, dtype=complex))

    def test_identity_mse_scaling(self):
        w = wmmse_weights(3.0, np.eye(2, dtype=complex), np.eye(2, dtype=complex))
        np.testing.assert_allclose(w.v1, 3.0 * np.eye(2))
        np.testing.assert_allclose(w.v2, 2.0 * np.eye(2))

    def test_lambda_one_zeroes_secondary_weight(self):
        rng = np.random.default_rng(22)
        a = crandn(rng, 3, 3)
        e = np.eye(3) * 0.5 + 0.01 * (a + a.conj().T)
        w = wmmse_weights(1.0, e, e)
        assert not np.any(w.v2)

    def test_conventional_weights_are_inverses(self):
        e = np.diag([0.5, 0.25]).astype(complex)
        w = conventional_weights(e, e)
        np.testing.assert_allclose(w.v1, np.diag([2.0, 4.0]))
        np.testing.assert_allclose(w.v2, np.diag([2.0, 4.0]))


class TestBisectMu:
    def _setup(self, seed):
        rng = np.random.default_rng(seed)
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        eff = random_eff(rng, 3, 3)
        w1, w2 = random_pair_on_budget(rng, 3, p.power_budget_w)
        u1 = mmse_equalizer(1, eff, w1, w2, p)
        u2 = mmse_equalizer(2, eff, w1, w2, p)
        e1 = mse_matrix(1, eff, w1, w2, p)
        e2 = mse_matrix(2, eff, w1, w2, p)
        return p, eff, wmmse_weights(4.0, e1, e2), (u1, u2)

    @pytest.mark.parametrize("seed", range(5))
    def test_power_budget_respected(self, seed):
        p, eff, weights, eq = self._setup(seed)
        pair = bisect_mu(eff, weights, eq, p.power_budget_w, p)
        assert pair.total_power <= p.power_budget_w * (1 + 1e-5)

    def test_active_constraint_hits_budget(self):
        p, eff, weights, eq = self._setup(30)
        pair = bisect_mu(eff, weights, eq, p.power_budget_w, p)
        if pair.mu > 0:
            assert pair.total_power == pytest.approx(p.power_budget_w, rel=1e-4)

    def test_large_budget_returns_unregularized(self):
        p, eff, weights, eq = self._setup(31)
        pair = bisect_mu(eff, weights, eq, 1e30, p)
        assert pair.mu == 0.0

    def test_zero_weights_give_zero_precoders(self):
        p, eff, _, eq = self._setup(32)
        z = np.zeros((3, 3), dtype=complex)
        pair = bisect_mu(eff, MseWeights(z, z), eq, p.power_budget_w, p)
        assert not np.any(pair.w1) and not np.any(pair.w2)

    def test_power_monotone_in_mu(self):
        # The bisection relies on transmit power decreasing with mu.
        from fronthaulsim.precoding import precoder_update

        p, eff, weights, eq = self._setup(33)
        powers = [
            precoder_update(eff, weights, eq, mu, p).total_power
            for mu in (1e-12, 1e-10, 1e-8, 1e-6)
        ]
        assert all(a >= b for a, b in zip(powers, powers[1:]))


class TestModifiedWmmse:
    def test_lambda_at_most_one_is_waterfilling(self):
        p = SystemParams(n_ap=3, n_cpu=2, m_ris=4)
        rng = np.random.default_rng(40)
        eff = random_eff(rng, 2, 3)
        for lam in (0.3, 1.0):
            pair = modified_wmmse(eff, lam, p.power_budget_w, p)
            ref = waterfilling(eff.h1, p.power_budget_w, p)
            np.testing.assert_allclose(pair.w1, ref.w1)
            assert not np.any(pair.w2)

    @pytest.mark.parametrize("seed", range(3))
    def test_beats_random_search_on_weighted_objective(self, seed):
        # The weighted update maximizes lam*R1 + (lam-1)*R2; with lambda > 1
        # fixed, the converged point should dominate 300 random feasible
        # precoders on that objective.
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        rng = np.random.default_rng(50 + seed)
        eff = random_eff(rng, 3, 3)
        lam = 10.0

        def objective(w1, w2):
            return lam * rate_bpshz(1, eff, w1, w2, p) + (lam - 1.0) * rate_bpshz(
                2, eff, w1, w2, p
            )

        pair = modified_wmmse(eff, lam, p.power_budget_w, p, inner_iters=60)
        best = objective(pair.w1, pair.w2)
        for _ in range(300):
            w1, w2 = random_pair_on_budget(rng, 3, p.power_budget_w)
            assert objective(w1, w2) <= best + 1e-6 * abs(best)

    def test_iterations_do_not_decrease_weighted_objective(self):
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        rng = np.random.default_rng(60)
        eff = random_eff(rng, 3, 3)
        lam = 5.0
        pair = default_precoder_init(eff, p.power_budget_w)

        def objective(w1, w2):
            return lam * rate_bpshz(1, eff, w1, w2, p) + (lam - 1.0) * rate_bpshz(
                2, eff, w1, w2, p
            )

        prev = objective(pair.w1, pair.w2)
        for _ in range(15):
            pair = modified_wmmse(eff, lam, p.power_budget_w, p, w_init=pair)
            cur = objective(pair.w1, pair.w2)
            assert cur >= prev - 1e-8 * max(abs(prev), 1.0)
            prev = cur

    def test_lagrangian_identity_with_weighted_objective(self):
        # r2 + lam*(c0 - r1 - r2) = lam*c0 - (lam*r1 + (lam-1)*r2).
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        rng = np.random.default_rng(63)
        eff = random_eff(rng, 3, 3)
        w1, w2 = random_pair_on_budget(rng, 3, p.power_budget_w)
        lam, c0 = 4.0, 7.0
        weighted = lam * rate_bpshz(1, eff, w1, w2, p) + (lam - 1.0) * rate_bpshz(
            2, eff, w1, w2, p
        )
        assert lagrangian_bpshz(eff, w1, w2, lam, c0, p) == pytest.approx(
            lam * c0 - weighted, rel=1e-10
        )

    def test_power_feasible(self):
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        rng = np.random.default_rng(61)
        eff = random_eff(rng, 3, 3)
        pair = modified_wmmse(eff, 3.0, p.power_budget_w, p, inner_iters=10)
        assert pair.total_power <= p.power_budget_w * (1 + 1e-5)

    def test_revives_zero_secondary_block(self):
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        rng = np.random.default_rng(62)
        eff = random_eff(rng, 3, 3)
        seed_pair = waterfilling(eff.h1, p.power_budget_w, p)
        assert not np.any(seed_pair.w2)
        pair = modified_wmmse(eff, 5.0, p.power_budget_w, p, w_init=seed_pair)
        assert np.any(pair.w2)


class TestSumRateWmmse:
    def test_sum_rate_nondecreasing(self):
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        rng = np.random.default_rng(70)
        eff = random_eff(rng, 3, 3)
        pair = default_precoder_init(eff, p.power_budget_w)
        prev = -np.inf
        for _ in range(15):
            pair = sum_rate_wmmse(eff, p.power_budget_w, p, w_init=pair)
            total = rate_bpshz(1, eff, pair.w1, pair.w2, p) + rate_bpshz(
                2, eff, pair.w1, pair.w2, p
            )
            assert total >= prev - 1e-8 * max(abs(prev), 1.0)
            prev = total


class TestDefaultInit:
    def test_within_budget_and_square(self):
        rng = np.random.default_rng(80)
        eff = EffectiveChannels(crandn(rng, 2, 5), crandn(rng, 5, 5))
        pair = default_precoder_init(eff, 4.0)
        assert pair.w1.shape == (5, 5)
        assert pair.w2.shape == (5, 5)
        assert pair.total_power <= 4.0 * (1 + 1e-12)

    def test_zero_channel_block_zero(self):
        eff = EffectiveChannels(
            np.zeros((2, 3), dtype=complex), np.ones((3, 3), dtype=complex)
        )
        pair = default_precoder_init(eff, 4.0)
        assert not np.any(pair.w1)
        assert np.any(pair.w2)
