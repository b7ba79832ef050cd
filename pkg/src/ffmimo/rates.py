"""Capacity and achievable-rate formulas for the finite-field channel.

All quantities are in bits.  Rates built from per-antenna noise marginals
assume the effective noise is independent across antennas; results that rely
on this carry ``meta["assume_independent"] = True``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import comb

from ._rng import batch_sizes, substream
from .channel import FiniteChannel
from .codes import CodebookView, md_decode, messages, plurality_decode, sc_order
from .errors import CapabilityError, RankDeficientError
from .gfmat import GfMatrix, greedy_row_select, mat_inverse, mat_rank
from .pmf import Pmf, combine

SCHEMES = ("AnSe-SIMO", "Rep", "SC", "ZF", "AnSe-MIMO", "LBC", "eLBC", "Capacity", "LinComb")
COMBINER_CAP = 1 << 20
JOINT_CAP = 1 << 20


@dataclass
class SchemeRate:
    """An achievable rate (or capacity) with the quantities that produced it."""

    scheme: str
    bits: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        cap = self.meta.get("max_bits")
        if self.bits < -1e-9 or (cap is not None and self.bits > cap + 1e-9):
            raise ValueError(f"{self.scheme} rate {self.bits} outside [0, {cap}]")
        self.bits = float(min(max(self.bits, 0.0), cap if cap is not None else math.inf))


def entropy(pmf) -> float:
    """Entropy in bits of a :class:`Pmf` or a probability vector."""
    if not isinstance(pmf, Pmf):
        pmf = Pmf(pmf)
    return pmf.entropy()


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy needs x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


def _error_count_dist(eps) -> np.ndarray:
    """Distribution of the number of nonzero noise symbols (independent antennas)."""
    dist = np.array([1.0])
    for e in eps:
        dist = np.concatenate([dist * (1.0 - e), [0.0]]) + np.concatenate([[0.0], dist * e])
    return dist


def pe_asym(t: int, eps: Sequence[float]) -> float:
    """Probability that more than ``t`` of the antennas see a nonzero noise symbol.

    Sums the product terms over all error sets of size ``t+1 .. N_r``; the
    sum is evaluated by the equivalent recursion over antennas.
    """
    eps = np.asarray(eps, dtype=float).ravel()
    if np.any((eps < 0) | (eps > 1)):
        raise ValueError("crossover probabilities must lie in [0, 1]")
    if not 0 <= t <= eps.size:
        raise ValueError(f"t must lie in [0, {eps.size}], got {t}")
    return float(min(1.0, math.fsum(_error_count_dist(eps)[t + 1:])))


def simo_capacity(eps: float, n_r: int) -> float:
    """Capacity of ``n_r`` parallel binary symmetric observations of one bit.

    Output vectors with ``j`` ones have probability ``alpha_j``; the capacity
    is the output entropy minus ``n_r`` times the per-antenna noise entropy.
    """
    j = np.arange(n_r + 1)
    alpha = 0.5 * (eps ** (n_r - j) * (1 - eps) ** j + eps**j * (1 - eps) ** (n_r - j))
    terms = np.where(alpha > 0, -alpha * np.log2(np.where(alpha > 0, alpha, 1.0)), 0.0)
    return float(math.fsum(comb(n_r, j) * terms) - n_r * binary_entropy(eps))


def simo_capacity_numeric(fc: FiniteChannel, cap: int = JOINT_CAP) -> SchemeRate:
    """``H(u) - sum_m H(z~_m)`` for a SIMO channel with independent noise.

    Builds the full ``p^N_r`` output pmf, so ``p^N_r`` must not exceed ``cap``.
    """
    if fc.n_t != 1:
        raise ValueError("SIMO capacity needs a single transmit antenna")
    p, n = fc.p, fc.n_r
    if p**n > cap:
        raise CapabilityError(f"{p}^{n} output vectors exceeds the cap {cap}")
    q = fc.Q.array[:, 0]
    joint = np.zeros(p**n)
    for c in range(p):
        pc = np.array([1.0])
        for m in range(n):
            shifted = np.roll(fc.noise_pmfs[m].probs, (c * int(q[m])) % p)
            pc = np.outer(pc, shifted).ravel()
        joint += pc / p
    bits = entropy(joint) - float(np.sum(fc.entropies))
    return SchemeRate("Capacity", bits, {"assume_independent": True, "max_bits": math.log2(p)})


def rate_antenna_selection(fc: FiniteChannel, n_t: int | None = None) -> SchemeRate:
    """Minimum-noise-entropy antenna selection.

    With one stream, pick the single best antenna; with ``n_t`` streams, the
    entropy-minimal set of ``n_t`` linearly independent rows of ``Q``.
    """
    n_t = fc.n_t if n_t is None else n_t
    p = fc.p
    h = fc.entropies
    if n_t == 1 and fc.n_t == 1:
        m = int(np.argmin(h))
        meta = {"m_dagger": m, "selected": (m,), "max_bits": math.log2(p)}
        return SchemeRate("AnSe-SIMO", math.log2(p) - float(h[m]), meta)
    U = greedy_row_select(fc.Q, h, n_t)
    bits = n_t * math.log2(p) - math.fsum(h[list(U)])
    return SchemeRate("AnSe-MIMO", bits, {"selected": U, "max_bits": n_t * math.log2(p),
                                          "assume_independent": True})


def _uniform_off_zero_rate(n_bits: float, pe: float, alphabet: int) -> float:
    """``n_bits - H_2(pe) - pe log2(alphabet - 1)`` for an error-probability bound ``pe``.

    The expression decreases in ``pe`` only up to ``(alphabet-1)/alphabet``,
    where it reaches 0; beyond that the bound carries no information.
    """
    pe = min(pe, (alphabet - 1) / alphabet)
    return max(0.0, n_bits - binary_entropy(pe) - pe * math.log2(alphabet - 1))


def rate_repetition(eps: Sequence[float], p: int) -> SchemeRate:
    """Repetition coding across receive antennas with plurality decoding.

    Uses the error-count tail beyond ``t = floor((N_r-1)/2)`` as the symbol
    error probability and spreads it uniformly over the wrong symbols, which
    lower-bounds the rate for ``p >= 3`` and is exact for ``p = 2``.
    """
    eps = np.asarray(eps, dtype=float).ravel()
    t = (eps.size - 1) // 2
    pe = pe_asym(t, eps)
    bits = _uniform_off_zero_rate(math.log2(p), pe, p)
    return SchemeRate("Rep", bits, {"pe": pe, "t": t, "max_bits": math.log2(p)})


def _square_full_rank(fc: FiniteChannel, what: str):
    if fc.n_r != fc.n_t:
        raise ValueError(f"{what} needs a square channel, got {fc.n_r}x{fc.n_t}")
    r = mat_rank(fc.Q)
    if r < fc.n_t:
        raise RankDeficientError(r, fc.n_t, f"{what} needs an invertible channel (rank {r})")


def mimo_sum_capacity(fc: FiniteChannel, assume_independent: bool = True,
                      joint_entropy: float | None = None) -> SchemeRate:
    """Sum capacity ``N_r log p - H(z~_1, ..., z~_N_r)`` of a square channel.

    The joint noise entropy is replaced by the sum of marginal entropies when
    ``assume_independent``; otherwise it must be supplied.
    """
    _square_full_rank(fc, "sum capacity")
    if assume_independent:
        hj = math.fsum(fc.entropies)
    elif joint_entropy is None:
        raise ValueError("joint_entropy is required when assume_independent is False")
    else:
        hj = float(joint_entropy)
    nmax = fc.n_r * math.log2(fc.p)
    return SchemeRate("Capacity", nmax - hj, {"assume_independent": assume_independent, "max_bits": nmax})


def rate_sc(fc: FiniteChannel) -> SchemeRate:
    """Successive coding sum rate ``N_r log p - sum_m H(z~_m)``."""
    _square_full_rank(fc, "successive coding")
    sched = sc_order(fc.Q, fc.entropies)
    nmax = fc.n_r * math.log2(fc.p)
    return SchemeRate("SC", nmax - math.fsum(fc.entropies),
                      {"order": sched.order, "stream_rates": sched.rates.tolist(), "pivots": sched.pivots,
                       "max_bits": nmax, "assume_independent": True})


def zeta_pmfs(fc: FiniteChannel) -> list[Pmf]:
    """Per-stream noise pmfs after zero-forcing: ``zeta = Q^{-1} z~``."""
    Qi = mat_inverse(fc.Q).array
    return [combine(fc.noise_pmfs, Qi[m], fc.p) for m in range(fc.n_t)]


def rate_zf(fc: FiniteChannel) -> SchemeRate:
    """Zero-forcing sum rate ``N_r log p - sum_m H(zeta_m)``."""
    _square_full_rank(fc, "zero-forcing")
    zs = zeta_pmfs(fc)
    h = [z.entropy() for z in zs]
    nmax = fc.n_r * math.log2(fc.p)
    return SchemeRate("ZF", nmax - math.fsum(h),
                      {"stream_entropies": h, "stream_error_probs": [z.error_prob for z in zs],
                       "max_bits": nmax, "assume_independent": True})


def _full_rank(fc: FiniteChannel, what: str):
    r = mat_rank(fc.Q)
    if r < fc.n_t:
        raise RankDeficientError(r, fc.n_t, f"{what} needs a full-rank channel (rank {r})")


def rate_elbc(fc: FiniteChannel, d_min: int | None = None) -> SchemeRate:
    """Linear-block-code rate with one outer code over the ``p^N_t``-ary alphabet.

    The block error probability is bounded by the chance of more than
    ``floor((d_min-1)/2)`` noisy antennas.  Message vectors are relabelled by
    their base-p index, which is all the extension field is needed for.
    """
    _full_rank(fc, "eLBC")
    if d_min is None:
        d_min = CodebookView(fc.Q).d_min
    t = (d_min - 1) // 2
    pe = pe_asym(t, fc.eps)
    nmax = fc.n_t * math.log2(fc.p)
    bits = _uniform_off_zero_rate(nmax, pe, fc.p**fc.n_t)
    return SchemeRate("eLBC", bits, {"pe": pe, "d_min": d_min, "t": t, "max_bits": nmax})


def sample_noise(fc: FiniteChannel, rng: np.random.Generator, trials: int) -> np.ndarray:
    """Independent draws of the noise vector from the per-antenna marginals."""
    return np.stack([f.sample(rng, trials) for f in fc.noise_pmfs], axis=1)


def rate_lbc(fc: FiniteChannel, trials: int = 10**5, seed: int | None = 0,
             batch_size: int = 1 << 14, cb: CodebookView | None = None) -> SchemeRate:
    """Linear-block-code rate with ``N_t`` separate outer codes, by simulation.

    Each trial draws a uniform message and independent noise symbols, decodes
    by minimum distance and records which streams came out wrong.  The
    per-stream error probabilities are plugged into the uniform-off-zero
    bound.
    """
    _full_rank(fc, "LBC")
    if trials < 1:
        raise ValueError("trials must be positive")
    cb = cb if cb is not None else CodebookView(fc.Q)
    p, k = fc.p, fc.n_t
    errors = np.zeros(k, dtype=np.int64)
    block = 0
    for b, n in enumerate(batch_sizes(trials, batch_size)):
        rng = substream(seed, 0x1BC, b)
        c = rng.integers(0, p, size=(n, k))
        u = np.mod(cb.encode(c) + sample_noise(fc, rng, n), p)
        wrong = md_decode(cb, u) != c
        errors += wrong.sum(axis=0)
        block += int(np.any(wrong, axis=1).sum())
    q = errors / trials
    se = np.sqrt(q * (1 - q) / trials)
    nmax = k * math.log2(p)
    bits = math.fsum(_uniform_off_zero_rate(math.log2(p), float(x), p) for x in q)
    return SchemeRate("LBC", bits, {"stream_error_probs": q.tolist(), "stream_stderr": se.tolist(),
                                    "block_error": block / trials, "trials": trials, "d_min": cb.d_min,
                                    "max_bits": nmax, "seed": seed})


def linear_combiner_rate(fc: FiniteChannel, w, require_signal: bool = False) -> float:
    """Rate ``log p - H(sum_i w_i z~_i)`` of the linear combiner ``w^T u``.

    Noise marginals are convolved as if independent.  The formula ignores
    the combined signal gain ``w^T q``; with ``require_signal=True`` a
    combiner with ``w^T q = 0`` (whose output carries no information about
    ``c``) gets rate 0 instead.
    """
    p = fc.p
    w = np.mod(np.asarray(w, dtype=np.int64), p)
    if require_signal and int(w @ fc.Q.array[:, 0]) % p == 0:
        return 0.0
    return math.log2(p) - combine(fc.noise_pmfs, w, p).entropy()


def best_linear_combiner(fc: FiniteChannel, cap: int = COMBINER_CAP) -> tuple[np.ndarray, float]:
    """Exhaustive search for the best linear combiner ``w`` in ``Z_p^N_r``.

    Candidates are visited in lexicographic order and the first maximiser is
    returned; ``w = 0`` is skipped.
    """
    if fc.n_t != 1:
        raise ValueError("linear combining is defined for a single transmit antenna")
    p, n = fc.p, fc.n_r
    if p**n > cap:
        raise CapabilityError(f"{p}^{n} combiners exceeds the search cap {cap}")
    best_w, best = None, -math.inf
    for w in messages(p, n)[1:]:
        r = linear_combiner_rate(fc, w)
        if r > best:
            best_w, best = w, r
    return best_w, best


def rate_repetition_mc(fc: FiniteChannel, trials: int = 10**5, seed: int | None = 0,
                       batch_size: int = 1 << 15) -> SchemeRate:
    """Monte Carlo estimate of ``log p - H(zeta)`` for plurality decoding.

    ``zeta`` is the decoded-symbol error; its pmf is estimated by frequency
    counts, so the returned rate is a plug-in estimate (not a bound).
    """
    if fc.n_t != 1:
        raise ValueError("repetition coding needs a single transmit antenna")
    p = fc.p
    counts = np.zeros(p, dtype=np.int64)
    for b, n in enumerate(batch_sizes(trials, batch_size)):
        rng = substream(seed, 0x4E9, b)
        c = rng.integers(0, p, size=n)
        u = np.mod(np.outer(c, fc.Q.array[:, 0]) + sample_noise(fc, rng, n), p)
        zeta = np.mod(plurality_decode(u, fc.Q) - c, p)
        counts += np.bincount(zeta, minlength=p)
    zpmf = Pmf(counts / trials, method="mc", samples=trials)
    pe = zpmf.error_prob
    return SchemeRate("Rep", math.log2(p) - zpmf.entropy(),
                      {"pe": pe, "stderr": math.sqrt(pe * (1 - pe) / trials), "trials": trials,
                       "zeta_pmf": zpmf.probs.tolist(), "method": "mc", "max_bits": math.log2(p)})
