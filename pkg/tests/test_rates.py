import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffmimo.channel import FiniteChannel
from ffmimo.errors import CapabilityError, RankDeficientError
from ffmimo.gfmat import GfMatrix, mat_rank
from ffmimo.mc import draw_random_Q
from ffmimo.pmf import Pmf
from ffmimo.rates import (SchemeRate, best_linear_combiner, binary_entropy, entropy, linear_combiner_rate,
                          mimo_sum_capacity, pe_asym, rate_antenna_selection, rate_elbc, rate_lbc, rate_repetition,
                          rate_repetition_mc, rate_sc, rate_zf, simo_capacity, simo_capacity_numeric, zeta_pmfs)

import oracles

HAMMING = GfMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1],
                    [1, 1, 0, 1], [1, 0, 1, 1], [0, 1, 1, 1]], 2)

# oracle value, sum of binomial terms j = 4..7 (frozen)
PE_7_3_015 = 0.012103171875


def ones(n, p):
    return GfMatrix(np.ones((n, 1), dtype=int), p)


def channel_with_entropies(h, p=2):
    """A SIMO channel over Z_2 whose antennas have the given noise entropies."""
    from scipy.optimize import brentq

    eps = [brentq(lambda e: binary_entropy(e) - x, 0.0, 0.5, xtol=1e-16, rtol=1e-15) if x > 0 else 0.0 for x in h]
    return FiniteChannel.symmetric(ones(len(h), p), eps)


class TestEntropies:
    def test_binary(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
        assert binary_entropy(0.15) == pytest.approx(0.60984, abs=1e-5)
        assert binary_entropy(0.15) == pytest.approx(oracles.h2(0.15), abs=1e-15)

    def test_entropy_vector(self):
        assert entropy([0.25] * 4) == pytest.approx(2.0)


class TestPeAsym:
    def test_three_antennas(self):
        e1, e2, e3 = 0.1, 0.2, 0.3
        want = (1 - e1) * e2 * e3 + (1 - e2) * e1 * e3 + (1 - e3) * e1 * e2 + e1 * e2 * e3
        assert pe_asym(1, [e1, e2, e3]) == pytest.approx(want, abs=1e-15)

    def test_zero(self):
        assert pe_asym(2, [0.0] * 5) == 0.0

    def test_binomial_tail(self):
        assert oracles.binomial_tail(7, 3, 0.15) == pytest.approx(PE_7_3_015, abs=1e-15)
        assert pe_asym(3, [0.15] * 7) == pytest.approx(PE_7_3_015, abs=1e-15)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    @settings(max_examples=60, deadline=None)
    def test_matches_pattern_sum(self, seed, n):
        eps = np.random.default_rng(seed).uniform(0, 1, n)
        t = int(np.random.default_rng(seed + 1).integers(0, n + 1))
        assert pe_asym(t, eps) == pytest.approx(oracles.error_prob_patterns(eps.tolist(), t), abs=1e-13)

    @pytest.mark.parametrize("eps", [0.01, 0.1, 0.25, 0.4, 0.49])
    def test_monotone_over_odd_n(self, eps):
        vals = [pe_asym((n - 1) // 2, [eps] * n) for n in range(1, 22, 2)]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


class TestSimoCapacity:
    def test_single_antenna(self):
        assert simo_capacity(0.15, 1) == pytest.approx(1 - oracles.h2(0.15), abs=1e-12)
        assert simo_capacity(0.15, 1) == pytest.approx(0.39016, abs=1e-5)

    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_pure_noise(self, n):
        assert simo_capacity(0.5, n) == pytest.approx(0.0, abs=1e-12)

    def test_three_antennas_joint_table(self):
        assert simo_capacity(0.15, 3) == pytest.approx(oracles.mutual_info_simo_bsc(0.15, 3), abs=1e-12)

    def test_numeric_matches_closed_form(self):
        for n in range(1, 7):
            fc = FiniteChannel.symmetric(ones(n, 2), 0.2)
            assert simo_capacity_numeric(fc).bits == pytest.approx(simo_capacity(0.2, n), abs=1e-12)

    def test_numeric_cap(self):
        with pytest.raises(CapabilityError):
            simo_capacity_numeric(FiniteChannel.symmetric(ones(8, 3), 0.1), cap=1000)


class TestAntennaSelection:
    def test_simo_example(self):
        fc = channel_with_entropies([0.7, 0.2, 0.9])
        r = rate_antenna_selection(fc)
        assert r.bits == pytest.approx(0.8, abs=1e-12)
        assert r.meta["m_dagger"] == 1  # second antenna, 0-based

    def test_equal_entropies(self):
        fc = FiniteChannel.symmetric(ones(3, 3), 0.2)
        assert rate_antenna_selection(fc).bits == pytest.approx(math.log2(3) - fc.entropies[0])

    def test_mimo_matches_best_pair(self):
        Q = GfMatrix([[1, 0], [1, 0], [0, 1]], 2)
        fc = FiniteChannel.symmetric(Q, [0.11, 0.01, 0.3])
        h = fc.entropies
        best, _ = oracles.best_subset(Q.array.tolist(), h.tolist(), 2, 2)
        assert rate_antenna_selection(fc).bits == pytest.approx(2 - best, abs=1e-12)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5]), st.integers(1, 6))
    @settings(max_examples=50, deadline=None)
    def test_simo_is_min_entropy(self, seed, p, n):
        rng = np.random.default_rng(seed)
        fc = FiniteChannel(ones(n, p), tuple(Pmf(rng.dirichlet(np.ones(p))) for _ in range(n)))
        assert rate_antenna_selection(fc).bits == math.log2(p) - min(fc.entropies)


class TestRepetition:
    def test_single_antenna(self):
        assert rate_repetition([0.15], 2).bits == pytest.approx(1 - oracles.h2(0.15), abs=1e-12)

    def test_three_antennas(self):
        pe = 3 * 0.15**2 * 0.85 + 0.15**3
        r = rate_repetition([0.15] * 3, 2)
        assert pe == pytest.approx(0.06075)
        assert r.meta["pe"] == pytest.approx(pe, abs=1e-15)
        assert r.bits == pytest.approx(1 - oracles.h2(0.06075), abs=1e-12)

    @pytest.mark.parametrize("p", [2, 3, 5, 7])
    def test_noiseless(self, p):
        assert rate_repetition([0.0] * 4, p).bits == pytest.approx(math.log2(p))

    @pytest.mark.parametrize("n", range(1, 16))
    @pytest.mark.parametrize("eps", [0.01, 0.05, 0.15, 0.3, 0.45, 0.5])
    def test_below_capacity(self, n, eps):
        assert rate_repetition([eps] * n, 2).bits <= simo_capacity(eps, n) + 1e-9

    def test_mc_close_to_analytic_p2(self):
        fc = FiniteChannel.symmetric(ones(5, 2), 0.15)
        r = rate_repetition_mc(fc, 10**5, seed=0)
        pe = rate_repetition([0.15] * 5, 2).meta["pe"]
        assert abs(r.meta["pe"] - pe) <= 3 * math.sqrt(pe * (1 - pe) / 10**5)


class TestMimo:
    def test_noiseless_capacity(self):
        fc = FiniteChannel.symmetric(GfMatrix.identity(3, 5), 0.0)
        assert mimo_sum_capacity(fc).bits == pytest.approx(3 * math.log2(5))
        assert rate_sc(fc).bits == pytest.approx(3 * math.log2(5))

    def test_capacity_two_antennas(self):
        fc = FiniteChannel.symmetric(GfMatrix.identity(2, 2), [0.1, 0.2])
        assert mimo_sum_capacity(fc).bits == pytest.approx(2 - oracles.h2(0.1) - oracles.h2(0.2), abs=1e-12)
        assert mimo_sum_capacity(fc).meta["assume_independent"] is True

    def test_joint_entropy_override(self):
        fc = FiniteChannel.symmetric(GfMatrix.identity(2, 2), [0.1, 0.2])
        assert mimo_sum_capacity(fc, assume_independent=False, joint_entropy=0.5).bits == pytest.approx(1.5)
        with pytest.raises(ValueError):
            mimo_sum_capacity(fc, assume_independent=False)

    def test_sc_arithmetic(self):
        fc = channel_with_entropies([0.3, 0.5])
        fc = FiniteChannel(GfMatrix.identity(2, 2), fc.noise_pmfs)
        assert rate_sc(fc).bits == pytest.approx(1.2, abs=1e-12)

    def test_sc_equals_capacity(self):
        rng = np.random.default_rng(0)
        for p in (2, 3, 5):
            Q = draw_random_Q(3, 3, p, rng=rng)
            fc = FiniteChannel.symmetric(Q, rng.uniform(0, 0.3, 3))
            assert rate_sc(fc).bits == pytest.approx(mimo_sum_capacity(fc).bits, abs=1e-12)

    def test_zf_identity_equals_sc(self):
        fc = FiniteChannel.symmetric(GfMatrix.identity(3, 3), [0.1, 0.2, 0.05])
        assert rate_zf(fc).bits == pytest.approx(rate_sc(fc).bits, abs=1e-12)

    def test_zf_xor_example(self):
        # Q^{-1} has first row [1, 1]
        Q = GfMatrix([[1, 1], [0, 1]], 2)
        fc = FiniteChannel.symmetric(Q, [0.1, 0.2])
        z = zeta_pmfs(fc)
        assert z[0].error_prob == pytest.approx(0.1 * 0.8 + 0.9 * 0.2)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5]), st.integers(2, 5))
    @settings(max_examples=60, deadline=None)
    def test_zf_never_beats_sc(self, seed, p, n):
        rng = np.random.default_rng(seed)
        Q = draw_random_Q(n, n, p, rng=rng)
        fc = FiniteChannel(Q, tuple(Pmf(rng.dirichlet(np.ones(p))) for _ in range(n)))
        assert rate_zf(fc).bits <= rate_sc(fc).bits + 1e-12

    def test_needs_square_invertible(self):
        with pytest.raises(ValueError):
            rate_sc(FiniteChannel.symmetric(ones(3, 2), 0.1))
        with pytest.raises(RankDeficientError):
            rate_zf(FiniteChannel.symmetric(GfMatrix([[1, 1], [1, 1]], 2), 0.1))


class TestLinearBlockCodes:
    def test_elbc_reduces_to_repetition(self):
        for n in range(1, 8):
            for p in (2, 3, 5):
                eps = np.random.default_rng(n * p).uniform(0, 0.3, n)
                fc = FiniteChannel.symmetric(ones(n, p), eps)
                assert rate_elbc(fc).bits == rate_repetition(eps, p).bits

    def test_elbc_noiseless(self):
        fc = FiniteChannel.symmetric(HAMMING, 0.0)
        assert rate_elbc(fc).bits == pytest.approx(4.0)

    def test_elbc_hamming(self):
        pe = sum(math.comb(7, k) * 0.05**k * 0.95 ** (7 - k) for k in range(2, 8))
        want = 4 - oracles.h2(pe) - pe * math.log2(15)
        r = rate_elbc(FiniteChannel.symmetric(HAMMING, 0.05))
        assert r.meta["d_min"] == 3 and r.meta["pe"] == pytest.approx(pe, abs=1e-14)
        assert r.bits == pytest.approx(want, abs=1e-12)

    def test_lbc_noiseless(self):
        r = rate_lbc(FiniteChannel.symmetric(HAMMING, 0.0), trials=2000)
        assert r.bits == 4.0 and r.meta["block_error"] == 0.0

    def test_lbc_repetition_matches_pe(self):
        fc = FiniteChannel.symmetric(ones(5, 2), 0.15)
        r = rate_lbc(fc, trials=10**5, seed=0)
        pe = pe_asym(2, [0.15] * 5)
        assert abs(r.meta["stream_error_probs"][0] - pe) <= 3 * math.sqrt(pe * (1 - pe) / 10**5)

    def test_lbc_near_elbc_on_hamming(self):
        fc = FiniteChannel.symmetric(HAMMING, 0.05)
        lbc = rate_lbc(fc, trials=2 * 10**4, seed=0)
        assert abs(lbc.bits - rate_elbc(fc).bits) < 0.5
        assert len(lbc.meta["stream_stderr"]) == 4


class TestLinearCombiner:
    def test_xor_combiner(self):
        fc = FiniteChannel.symmetric(ones(2, 2), [0.1, 0.1])
        r = linear_combiner_rate(fc, [1, 1])
        assert r == pytest.approx(1 - oracles.h2(0.18), abs=1e-12)
        assert r < 1 - oracles.h2(0.1)
        # the unit-gain signal cancels in u_1 + u_2 over Z_2
        assert linear_combiner_rate(fc, [1, 1], require_signal=True) == 0.0

    def test_never_returns_zero_vector(self):
        fc = FiniteChannel.symmetric(ones(3, 3), [0.2, 0.1, 0.3])
        w, bits = best_linear_combiner(fc)
        assert np.any(w) and bits > 0

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]), st.integers(1, 4))
    @settings(max_examples=60, deadline=None)
    def test_selection_is_best_linear(self, seed, p, n):
        rng = np.random.default_rng(seed)
        fc = FiniteChannel(GfMatrix(rng.integers(1, p, size=(n, 1)), p),
                           tuple(Pmf(rng.dirichlet(np.ones(p))) for _ in range(n)))
        _, bits = best_linear_combiner(fc)
        assert bits == rate_antenna_selection(fc).bits
        h = fc.entropies
        for w in itertools.product(range(p), repeat=n):
            if any(w):
                bound = math.log2(p) - min(h[i] for i in range(n) if w[i])
                assert linear_combiner_rate(fc, w) <= bound + 1e-12

    def test_cap(self):
        with pytest.raises(CapabilityError):
            best_linear_combiner(FiniteChannel.symmetric(ones(6, 3), 0.1), cap=100)


class TestSchemeRate:
    def test_bounds(self):
        with pytest.raises(ValueError):
            SchemeRate("SC", 3.0, {"max_bits": 2.0})
        with pytest.raises(ValueError):
            SchemeRate("SC", -0.1)
        with pytest.raises(ValueError):
            SchemeRate("nope", 0.1)
