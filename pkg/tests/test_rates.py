import numpy as np
import pytest

from fronthaulsim.config import PropagationState, SystemParams
from fronthaulsim.channel import ChannelRealization
from fronthaulsim.rates import (
    EffectiveChannels,
    effective_channel,
    individual_rate,
    lagrangian_bpshz,
    mmse_equalizer,
    mse_matrix,
    rate_bpshz,
)

from conftest import crandn, random_realization


def scalar_params(bandwidth=1.0, noise=1.0):
    return SystemParams(
        bandwidth_hz=bandwidth, noise_psd=noise, power_budget_w=1.0,
        n_ap=1, n_cpu=1, m_ris=1,
    )


class TestEffectiveChannel:
    def test_no_ris_path_reduces_to_direct(self, small_params):
        rng = np.random.default_rng(0)
        real = random_realization(rng, small_params)
        real = ChannelRealization(
            real.h_s1, real.h_s2, real.h_t,
            np.zeros_like(real.h_r1), np.zeros_like(real.h_r2),
            PropagationState.LOS, PropagationState.LOS,
        )
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, small_params.m_ris))
        eff = effective_channel(real, phi)
        np.testing.assert_array_equal(eff.h1, real.h_s1)
        np.testing.assert_array_equal(eff.h2, real.h_s2)

    def test_scalar_expansion(self):
        real = ChannelRealization(
            h_s1=np.array([[1 + 2j]]), h_s2=np.array([[0.5j]]),
            h_t=np.array([[2 - 1j]]), h_r1=np.array([[0.3 + 0.4j]]),
            h_r2=np.array([[1.0 + 0j]]),
            state_s1=PropagationState.LOS, state_s2=PropagationState.LOS,
        )
        phi = np.array([np.exp(0.7j)])
        eff = effective_channel(real, phi)
        assert eff.h1[0, 0] == pytest.approx((1 + 2j) + (0.3 + 0.4j) * np.exp(0.7j) * (2 - 1j))

    def test_matches_column_row_expansion(self):
        # Brute-force oracle: H_k = H_s + sum_m phi_m h_r[:,m] h_t[m,:].
        rng = np.random.default_rng(1)
        n, m = 2, 4
        h_s = crandn(rng, n, n)
        h_t = crandn(rng, m, n)
        h_r = crandn(rng, n, m)
        real = ChannelRealization(
            h_s, h_s.copy(), h_t, h_r, h_r.copy(),
            PropagationState.LOS, PropagationState.LOS,
        )
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, m))
        expected = h_s + sum(phi[i] * np.outer(h_r[:, i], h_t[i, :]) for i in range(m))
        eff = effective_channel(real, phi)
        np.testing.assert_allclose(eff.h1, expected, rtol=1e-12)

    def test_dimension_mismatch_rejected(self, small_params):
        rng = np.random.default_rng(2)
        real = random_realization(rng, small_params)
        with pytest.raises(ValueError):
            effective_channel(real, np.ones(small_params.m_ris + 1))

    def test_linear_in_phi_without_modulus_constraint(self, small_params):
        rng = np.random.default_rng(3)
        real = random_realization(rng, small_params)
        pa = crandn(rng, small_params.m_ris)
        pb = crandn(rng, small_params.m_ris)
        ha = effective_channel(real, pa).h1
        hb = effective_channel(real, pb).h1
        hab = effective_channel(real, pa + pb).h1
        np.testing.assert_allclose(ha + hb - real.h_s1, hab, rtol=1e-10)


class TestIndividualRate:
    def test_zero_precoder_zero_rate(self, small_params):
        rng = np.random.default_rng(4)
        real = random_realization(rng, small_params)
        eff = effective_channel(real, np.ones(small_params.m_ris, dtype=complex))
        n = small_params.n_ap
        w = crandn(rng, n, n)
        z = np.zeros((n, n), dtype=complex)
        assert rate_bpshz(1, eff, z, w, small_params) == 0.0
        assert rate_bpshz(2, eff, w, z, small_params) == 0.0

    def test_scalar_shannon_form(self):
        p = scalar_params(bandwidth=2.0, noise=0.25)
        h = 0.8 - 0.3j
        w = 1.7 + 0j
        eff = EffectiveChannels(np.array([[h]]), np.array([[h]]))
        got = individual_rate(1, eff, np.array([[w]]), np.array([[0j]]), p)
        snr = abs(h * w) ** 2 / (p.bandwidth_hz * p.noise_psd)
        assert got == pytest.approx(p.bandwidth_hz * np.log2(1 + snr), rel=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_rate_mmse_identity(self, seed):
        # R_k = -B log2 det(E_k) with the MSE matrix at the MMSE equalizer.
        rng = np.random.default_rng(seed)
        p = SystemParams(n_ap=4, n_cpu=3, m_ris=4)
        eff = EffectiveChannels(crandn(rng, 3, 4) * 1e-5, crandn(rng, 4, 4) * 1e-5)
        w1 = crandn(rng, 4, 4)
        w2 = crandn(rng, 4, 4)
        for k in (1, 2):
            e = mse_matrix(k, eff, w1, w2, p)
            sign, logdet = np.linalg.slogdet(e)
            assert sign == pytest.approx(1.0)
            identity_rate = -logdet / np.log(2)
            assert rate_bpshz(k, eff, w1, w2, p) == pytest.approx(identity_rate, rel=1e-8)

    def test_unitary_right_invariance(self):
        rng = np.random.default_rng(11)
        p = SystemParams(n_ap=4, n_cpu=4, m_ris=4)
        eff = EffectiveChannels(crandn(rng, 4, 4), crandn(rng, 4, 4))
        w1 = crandn(rng, 4, 4)
        w2 = crandn(rng, 4, 4)
        q, _ = np.linalg.qr(crandn(rng, 4, 4))
        assert rate_bpshz(1, eff, w1 @ q, w2, p) == pytest.approx(
            rate_bpshz(1, eff, w1, w2, p), rel=1e-10
        )

    @pytest.mark.parametrize("seed", range(5))
    def test_more_interference_never_helps(self, seed):
        rng = np.random.default_rng(100 + seed)
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        eff = EffectiveChannels(crandn(rng, 3, 3), crandn(rng, 3, 3))
        w1 = crandn(rng, 3, 3)
        w2 = crandn(rng, 3, 3)
        base = rate_bpshz(1, eff, w1, w2, p)
        boosted = rate_bpshz(1, eff, w1, 2.0 * w2, p)
        assert boosted <= base + 1e-10


class TestMseMatrix:
    def test_zero_precoder_gives_identity(self, small_params):
        rng = np.random.default_rng(12)
        real = random_realization(rng, small_params)
        eff = effective_channel(real, np.ones(small_params.m_ris, dtype=complex))
        n = small_params.n_ap
        z = np.zeros((n, n), dtype=complex)
        np.testing.assert_allclose(mse_matrix(1, eff, z, z, small_params), np.eye(n))

    def test_hermitian_with_unit_interval_spectrum(self):
        rng = np.random.default_rng(13)
        p = SystemParams(n_ap=4, n_cpu=4, m_ris=4)
        eff = EffectiveChannels(crandn(rng, 4, 4), crandn(rng, 4, 4))
        e = mse_matrix(1, eff, crandn(rng, 4, 4), crandn(rng, 4, 4), p)
        assert np.linalg.norm(e - e.conj().T) < 1e-10 * np.linalg.norm(e)
        eig = np.linalg.eigvalsh(e)
        assert np.all(eig > 0)
        assert np.all(eig <= 1 + 1e-10)


class TestMmseEqualizer:
    def test_zero_precoders_zero_equalizer(self, small_params):
        rng = np.random.default_rng(14)
        real = random_realization(rng, small_params)
        eff = effective_channel(real, np.ones(small_params.m_ris, dtype=complex))
        n = small_params.n_ap
        z = np.zeros((n, n), dtype=complex)
        assert not np.any(mmse_equalizer(1, eff, z, z, small_params))

    def test_scalar_closed_form(self):
        p = scalar_params(noise=0.5)
        h = 1.2 - 0.4j
        w1 = 0.8 + 0.1j
        w2 = 0.3 - 0.2j
        eff = EffectiveChannels(np.array([[h]]), np.array([[h]]))
        u = mmse_equalizer(1, eff, np.array([[w1]]), np.array([[w2]]), p)
        denom = abs(h * w1) ** 2 + abs(h * w2) ** 2 + p.bandwidth_hz * p.noise_psd
        assert u[0, 0] == pytest.approx(np.conj(w1) * np.conj(h) / denom)

    def test_minimizes_mse_trace_locally(self):
        rng = np.random.default_rng(15)
        p = SystemParams(n_ap=3, n_cpu=2, m_ris=4)
        h1 = crandn(rng, 2, 3)
        h2 = crandn(rng, 3, 3)
        eff = EffectiveChannels(h1, h2)
        w1 = crandn(rng, 3, 3)
        w2 = crandn(rng, 3, 3)
        u = mmse_equalizer(1, eff, w1, w2, p)

        def mse_trace(u_mat):
            # E{(s - U y)(s - U y)^H} expanded for E{s s^H} = I.
            h = eff.h1
            cov = h @ (w1 @ w1.conj().T + w2 @ w2.conj().T) @ h.conj().T
            cov = cov + p.noise_power_w * np.eye(2)
            cross = u_mat @ h @ w1
            e = (
                np.eye(3) - cross - cross.conj().T + u_mat @ cov @ u_mat.conj().T
            )
            return float(np.real(np.trace(e)))

        base = mse_trace(u)
        for _ in range(100):
            perturbed = u + 1e-3 * crandn(rng, 3, 2)
            assert mse_trace(perturbed) >= base - 1e-12


class TestLagrangian:
    def _setup(self, seed=16):
        rng = np.random.default_rng(seed)
        p = SystemParams(n_ap=3, n_cpu=3, m_ris=4)
        eff = EffectiveChannels(crandn(rng, 3, 3), crandn(rng, 3, 3))
        w1 = crandn(rng, 3, 3)
        w2 = crandn(rng, 3, 3)
        return p, eff, w1, w2

    def test_lambda_zero_is_r2(self):
        p, eff, w1, w2 = self._setup()
        r2 = rate_bpshz(2, eff, w1, w2, p)
        assert lagrangian_bpshz(eff, w1, w2, 0.0, 5.0, p) == pytest.approx(r2)

    def test_constraint_met_makes_lambda_irrelevant(self):
        p, eff, w1, w2 = self._setup()
        r1 = rate_bpshz(1, eff, w1, w2, p)
        r2 = rate_bpshz(2, eff, w1, w2, p)
        c0 = r1 + r2
        for lam in (0.0, 1.0, 7.5):
            assert lagrangian_bpshz(eff, w1, w2, lam, c0, p) == pytest.approx(r2)

    def test_lambda_one_cancels_r2(self):
        p, eff, w1, w2 = self._setup()
        r1 = rate_bpshz(1, eff, w1, w2, p)
        got = lagrangian_bpshz(eff, w1, w2, 1.0, 4.0, p)
        assert got == pytest.approx(4.0 - r1)
