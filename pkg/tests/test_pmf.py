import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffmimo.pmf import Pmf, combine

import oracles


def random_pmf(rng, p):
    return Pmf(rng.dirichlet(np.ones(p)))


def test_rejects_bad_mass():
    with pytest.raises(ValueError):
        Pmf([0.5, 0.6])
    with pytest.raises(ValueError):
        Pmf([1.2, -0.2])


def test_symmetric():
    f = Pmf.symmetric(0.2, 5)
    assert f.error_prob == pytest.approx(0.2)
    assert np.allclose(f.probs[1:], 0.05)


def test_entropy_matches_oracle():
    rng = np.random.default_rng(0)
    for p in (2, 3, 5, 7):
        f = random_pmf(rng, p)
        assert f.entropy() == pytest.approx(oracles.entropy_bits(f.probs), abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5]))
@settings(max_examples=50, deadline=None)
def test_entropy_is_label_invariant(seed, p):
    rng = np.random.default_rng(seed)
    f = random_pmf(rng, p)
    for a in range(1, p):
        assert f.scaled(a).entropy() == f.entropy()


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5]), st.integers(1, 3))
@settings(max_examples=50, deadline=None)
def test_combine_matches_joint_enumeration(seed, p, n):
    rng = np.random.default_rng(seed)
    pmfs = [random_pmf(rng, p) for _ in range(n)]
    w = rng.integers(0, p, size=n)
    got = combine(pmfs, w, p)
    want = oracles.combined_noise_pmf([f.probs for f in pmfs], w.tolist(), p)
    assert np.allclose(got.probs, want, atol=1e-12)
    assert got.probs.sum() == pytest.approx(1.0, abs=1e-9)


def test_two_coin_xor():
    f = combine([Pmf.symmetric(0.1, 2), Pmf.symmetric(0.2, 2)], [1, 1], 2)
    assert f.error_prob == pytest.approx(0.1 * 0.8 + 0.9 * 0.2)


def test_sampling_frequencies():
    f = Pmf([0.5, 0.3, 0.2])
    x = f.sample(np.random.default_rng(1), 10**5)
    freq = np.bincount(x, minlength=3) / x.size
    se = np.sqrt(f.probs * (1 - f.probs) / x.size)
    assert np.all(np.abs(freq - f.probs) < 3 * se + 1e-12) or np.all(np.abs(freq - f.probs) < 4 * se)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5, 7, 11]))
@settings(max_examples=100, deadline=None)
def test_entropy_label_invariant(seed, p):
    rng = np.random.default_rng(seed)
    f = random_pmf(rng, p)
    g = Pmf(f.probs[rng.permutation(p)])
    assert g.entropy() == f.entropy()
    assert f.entropy() == pytest.approx(oracles.entropy_bits(f.probs), abs=1e-12)
