"""Monte Carlo engine for end-to-end detection error rates.

Trials run in fixed-size batches; batch ``b`` draws everything (messages,
noise, and for the random ensemble the channel itself) from the substream
``(seed, b)``.  Batch results are integer counts merged by addition, so the
outcome is identical for any number of worker processes.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from ._rng import batch_sizes, substream
from .channel import FiniteChannel, RealChannel, choose_A, sample_noise_symbols, simulate_receive, transform
from .codes import CodebookView, md_decode, plurality_decode, sc_recover, zf_detect
from .errors import FfmimoError
from .gfmat import GfMatrix, greedy_row_select, mat_rank
from .rates import sample_noise

log = logging.getLogger(__name__)

DETECTORS = ("plurality", "md", "zf", "sc", "as")
MAX_REJECTIONS = 10**4


class ImprobableConfigurationError(FfmimoError, RuntimeError):
    """Rejection sampling gave up."""


def draw_random_Q(n_r: int, n_t: int, p: int, seed: int | None = None, require_full_rank: bool = True, *,
                  rng: np.random.Generator | None = None, nonzero: bool = False,
                  max_rejections: int = MAX_REJECTIONS, return_rejections: bool = False):
    """Random system matrix with iid uniform entries in ``Z_p``.

    With ``require_full_rank`` draws are rejected until the rank is ``n_t``;
    ``nonzero`` restricts entries to ``1 .. p-1``.
    """
    rng = rng if rng is not None else substream(seed, 0x51)
    lo = 1 if nonzero else 0
    for rejections in range(max_rejections):
        Q = GfMatrix(rng.integers(lo, p, size=(n_r, n_t)), p)
        if not require_full_rank or mat_rank(Q) == n_t:
            return (Q, rejections) if return_rejections else Q
    raise ImprobableConfigurationError(
        f"{max_rejections} consecutive rank-deficient {n_r}x{n_t} draws over Z_{p}")


@dataclass
class McConfig:
    """One Monte Carlo experiment.

    The channel is either an explicit :class:`FiniteChannel`, an explicit
    :class:`RealChannel` (run through the Gaussian front end when
    ``noise == "gaussian"``, or through its marginal pmfs), or ``None`` for
    the random-Q ensemble, where every batch draws a fresh full-rank ``Q``
    and crossover vector.  ``eps`` fixes the crossovers of the random
    ensemble; otherwise ``eps_range = (lo, hi)`` draws them uniformly.
    """

    scheme: Literal["plurality", "md", "zf", "sc", "as"]
    trials: int
    seed: int = 0
    p: int = 2
    n_t: int = 1
    n_r: int = 1
    channel: FiniteChannel | RealChannel | None = None
    eps: Sequence[float] | float | None = None
    eps_range: tuple[float, float] | None = None
    noise: Literal["marginal", "gaussian"] = "marginal"
    batch_size: int = 1 << 13
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in DETECTORS:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {DETECTORS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.channel is not None:
            self.p = self.channel.p
            self.n_r, self.n_t = self.channel.n_r, self.channel.n_t
        elif self.eps is None and self.eps_range is None:
            raise ValueError("random-Q ensemble needs eps or eps_range")
        if self.eps is not None and np.any((np.asarray(self.eps) < 0) | (np.asarray(self.eps) > 1)):
            raise ValueError("eps must lie in [0, 1]")
        if self.eps_range is not None:
            lo, hi = self.eps_range
            if not 0 <= lo <= hi <= 1:
                raise ValueError("eps_range must satisfy 0 <= lo <= hi <= 1")
        if self.noise == "gaussian" and not isinstance(self.channel, RealChannel):
            raise ValueError("the Gaussian front end needs a RealChannel")
        _check_shape(self.scheme, self.n_r, self.n_t)


def _check_shape(scheme: str, n_r: int, n_t: int):
    if scheme == "plurality" and n_t != 1:
        raise ValueError("plurality decoding needs N_t = 1")
    if scheme in ("zf", "sc") and n_r != n_t:
        raise ValueError(f"{scheme} needs a square channel, got {n_r}x{n_t}")
    if n_r < n_t:
        raise ValueError(f"N_r = {n_r} < N_t = {n_t}")


@dataclass
class McResult:
    """Error-rate estimates with binomial standard errors."""

    stream_errors: np.ndarray
    block_error: float
    stream_stderr: np.ndarray
    block_stderr: float
    trials: int
    seed: int
    elapsed: float = field(default=0.0, compare=False)
    meta: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, McResult):
            return NotImplemented
        return (np.array_equal(self.stream_errors, other.stream_errors) and self.block_error == other.block_error
                and self.trials == other.trials and self.seed == other.seed and self.meta == other.meta)

    @property
    def symbol_error(self) -> float:
        return float(np.mean(self.stream_errors))


def _stderr(q, n):
    return np.sqrt(np.asarray(q) * (1 - np.asarray(q)) / n)


def _detect(scheme: str, fc: FiniteChannel, u: np.ndarray, z: np.ndarray, cb: CodebookView | None):
    if scheme == "plurality":
        return plurality_decode(u, fc.Q).reshape(-1, 1)
    if scheme == "md":
        return md_decode(cb, u)
    if scheme == "zf":
        return zf_detect(fc.Q, u)
    if scheme == "sc":
        return sc_recover(fc, u, genie_noise=z)
    sel = list(greedy_row_select(fc.Q, fc.entropies))
    return zf_detect(fc.Q.take_rows(sel), u[:, sel])


def _ensemble_channel(cfg: McConfig, rng: np.random.Generator) -> FiniteChannel:
    Q = draw_random_Q(cfg.n_r, cfg.n_t, cfg.p, rng=rng, nonzero=cfg.scheme == "plurality")
    if cfg.eps is not None:
        eps = np.broadcast_to(np.asarray(cfg.eps, dtype=float), (cfg.n_r,))
    else:
        eps = rng.uniform(*cfg.eps_range, size=cfg.n_r)
    return FiniteChannel.symmetric(Q, eps)


def _prepare(cfg: McConfig):
    """Resolve the channel once for explicit sources; ``None`` for the ensemble."""
    ch = cfg.channel
    if ch is None:
        return None, None
    if isinstance(ch, RealChannel):
        fc = transform(ch)
        if cfg.noise == "gaussian":
            return fc, choose_A(ch)
        return fc, None
    return ch, None


def _run_batch(cfg: McConfig, b: int, n: int, fc: FiniteChannel | None, coeff) -> tuple[np.ndarray, int]:
    rng = substream(cfg.seed, 0x3C, b)
    if fc is None:
        fc = _ensemble_channel(cfg, rng)
    cb = CodebookView(fc.Q) if cfg.scheme == "md" else None
    c = rng.integers(0, fc.p, size=(n, fc.n_t))
    if coeff is not None:
        u = simulate_receive(cfg.channel, coeff, c, rng=rng)
        z = np.mod(u - c @ coeff.A.T, fc.p)
    else:
        z = sample_noise(fc, rng, n)
        u = np.mod(c @ fc.Q.array.T + z, fc.p)
    wrong = _detect(cfg.scheme, fc, u, z, cb) != c
    return wrong.sum(axis=0), int(np.any(wrong, axis=1).sum())


def _run_batches(args):
    cfg, jobs, fc, coeff = args
    return [_run_batch(cfg, b, n, fc, coeff) for b, n in jobs]


def run(cfg: McConfig) -> McResult:
    """Simulate ``cfg.trials`` transmissions and count detection errors."""
    t0 = time.perf_counter()
    fc, coeff = _prepare(cfg)
    if fc is not None:
        _check_shape(cfg.scheme, fc.n_r, fc.n_t)
    jobs = list(enumerate(batch_sizes(cfg.trials, cfg.batch_size)))
    if cfg.workers > 1 and len(jobs) > 1:
        shards = [jobs[i::cfg.workers] for i in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as ex:
            parts = [r for shard in ex.map(_run_batches, [(cfg, s, fc, coeff) for s in shards]) for r in shard]
    else:
        parts = _run_batches((cfg, jobs, fc, coeff))
    stream = np.zeros(cfg.n_t, dtype=np.int64)
    block = 0
    for s, blk in parts:
        stream += s
        block += blk
    q = stream / cfg.trials
    qb = block / cfg.trials
    meta = {"scheme": cfg.scheme, "noise": cfg.noise,
            "source": "ensemble" if cfg.channel is None else type(cfg.channel).__name__}
    return McResult(q, qb, _stderr(q, cfg.trials), float(_stderr(qb, cfg.trials)), cfg.trials, cfg.seed,
                    time.perf_counter() - t0, meta)


@dataclass
class DependenceReport:
    """Pairwise empirical dependence of the effective noise symbols.

    ``joint[(i, j)]`` is the ``p x p`` empirical joint pmf of antennas ``i < j``
    and ``mi[(i, j)]`` its plug-in mutual information in bits.
    """

    marginals: np.ndarray
    joint: dict
    mi: dict
    trials: int
    seed: int

    @property
    def max_mi(self) -> float:
        return max(self.mi.values(), default=0.0)


def _plugin_mi(joint: np.ndarray) -> float:
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nz = joint > 0
    ratio = joint[nz] / np.outer(px, py)[nz]
    return float(max(0.0, math.fsum((joint[nz] * np.log2(ratio)).ravel())))


def empirical_joint_dependence(ch: RealChannel, trials: int = 10**5, seed: int = 0,
                               batch_size: int = 1 << 15) -> DependenceReport:
    """Estimate pairwise joint pmfs and mutual informations of ``z~`` by simulation."""
    if trials < 10**4:
        raise ValueError("need at least 10^4 trials for a dependence estimate")
    coeff = choose_A(ch)
    p, n = ch.p, ch.n_r
    pair_counts = {(i, j): np.zeros((p, p), dtype=np.int64) for i in range(n) for j in range(i + 1, n)}
    marg = np.zeros((n, p), dtype=np.int64)
    for b, k in enumerate(batch_sizes(trials, batch_size)):
        z = sample_noise_symbols(ch, coeff, k, substream(seed, 0xD6, b))
        for m in range(n):
            marg[m] += np.bincount(z[:, m], minlength=p)
        for (i, j), cnt in pair_counts.items():
            cnt += np.bincount(z[:, i] * p + z[:, j], minlength=p * p).reshape(p, p)
    joint = {key: cnt / trials for key, cnt in pair_counts.items()}
    return DependenceReport(marg / trials, joint, {key: _plugin_mi(j) for key, j in joint.items()}, trials, seed)
