"""Gaussian MIMO front end and its reduction to a linear channel over Z_p.

Each transmit antenna sends a constellation point ``x_l = modulate(c_l)``,
every receive antenna applies the sawtooth ADC and demodulates, and with an
integer coefficient matrix ``A`` close to ``H`` the result is::

    u = Q c (+) z~,    Q = A mod p,

where ``z~_m`` is the field symbol of the quantised residual
``e_m + z_m = sum_l (H - A)_{m,l} x_l + z_m``.  :func:`effective_noise_pmf`
computes the marginal pmf of ``z~_m`` exactly; the joint law across antennas
is not modelled (see :func:`ffmimo.mc.empirical_joint_dependence`).

The decision region for noise symbol ``u`` is the union of coding-lattice
cells ``[kappa*(k-1/2), kappa*(k+1/2))`` with ``k = u (mod p)``, i.e. it is
built from the coding-lattice quantiser, the one the ADC actually uses.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from . import textio
from ._rng import substream
from .errors import UnfixableChannelError
from .gfmat import GfMatrix, check_prime, mat_rank
from .lattice import LatticeParams, demodulate, modulate, sawtooth
from .pmf import Pmf

log = logging.getLogger(__name__)

MIXTURE_CAP = 1 << 20
FOLD_TAIL = 1e-12
MC_PMF_SAMPLES = 10**6
REPAIR_CAP = 1 << 22


def realify(Hc, xc=None):
    """Real-valued representation of a complex channel.

    Returns ``[[Re H, -Im H], [Im H, Re H]]`` and, if ``xc`` is given, the
    stacked vector ``[Re x; Im x]``.
    """
    Hc = np.atleast_2d(np.asarray(Hc, dtype=complex))
    H = np.block([[Hc.real, -Hc.imag], [Hc.imag, Hc.real]])
    if xc is None:
        return H
    xc = np.asarray(xc, dtype=complex).reshape(-1)
    if xc.size != Hc.shape[1]:
        raise ValueError(f"x has {xc.size} entries, H has {Hc.shape[1]} columns")
    return H, np.concatenate([xc.real, xc.imag])


@dataclass(frozen=True, eq=False)
class RealChannel:
    """Real Gaussian MIMO channel ``y = H x + z`` with unit-variance noise."""

    H: np.ndarray
    snr: float
    p: int
    seed: int | None = None

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        if H.ndim == 1:
            H = H.reshape(-1, 1)
        if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
            raise ValueError(f"H must be a non-empty matrix, got shape {H.shape}")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)
        check_prime(self.p)
        if not self.snr > 0:
            raise ValueError(f"snr must be positive, got {self.snr}")

    @property
    def n_r(self) -> int:
        return self.H.shape[0]

    @property
    def n_t(self) -> int:
        return self.H.shape[1]

    @property
    def params(self) -> LatticeParams:
        return LatticeParams(self.p, self.snr)

    def to_text(self) -> str:
        return textio.format_real_channel(self.H, self.snr, self.p, self.seed)

    @classmethod
    def from_text(cls, text: str, source: str = "<channel>") -> RealChannel:
        H, snr, p, seed = textio.parse_real_channel(text, source)
        try:
            return cls(H, snr, p, seed)
        except ValueError as exc:
            from .errors import ParseError

            raise ParseError(str(exc), 1, 1, source) from None


@dataclass(frozen=True, eq=False)
class IntegerCoeffMatrix:
    """Integer approximation ``A`` of ``H``; ``added_error`` is the squared
    error paid on top of plain rounding to make ``A mod p`` full rank."""

    A: np.ndarray
    added_error: float = 0.0

    def __post_init__(self):
        A = np.array(self.A, dtype=np.int64)
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    def Q(self, p: int) -> GfMatrix:
        return GfMatrix(self.A, p)


def _usable(A: np.ndarray, p: int) -> bool:
    Q = GfMatrix(A, p)
    if Q.cols == 1:
        return bool(np.all(Q.array != 0))
    return mat_rank(Q) == Q.cols


def choose_A(ch: RealChannel, max_candidates: int = REPAIR_CAP) -> IntegerCoeffMatrix:
    """Nearest-integer coefficient matrix with a cheapest-repair rank fix.

    Elementwise rounding minimises ``sum (H - A)^2``.  If ``A mod p`` is rank
    deficient (or, for a single transmit antenna, has a zero entry), entries
    are moved to their other integer neighbour, trying flip sets in ascending
    order of added squared error until the system matrix is usable.
    """
    H, p = ch.H, ch.p
    if ch.n_t > ch.n_r:
        raise UnfixableChannelError(f"{ch.n_r}x{ch.n_t} system matrix can never have rank {ch.n_t}")
    A0 = np.floor(H + 0.5).astype(np.int64)
    if _usable(A0, p):
        return IntegerCoeffMatrix(A0)
    resid = H - A0
    alt = A0 + np.where(resid >= 0, 1, -1)
    cost = ((H - alt) ** 2 - resid**2).ravel()
    order = np.argsort(cost, kind="stable")
    c = cost[order]
    n = c.size
    # Lazy enumeration of flip subsets in non-decreasing total cost: from a
    # subset ending at sorted position j, either append j+1 or replace j by j+1.
    heap = [(float(c[0]), (0,))]
    tried = 0
    while heap and tried < max_candidates:
        total, subset = heapq.heappop(heap)
        tried += 1
        A = A0.copy().ravel()
        pos = order[list(subset)]
        A[pos] = alt.ravel()[pos]
        A = A.reshape(A0.shape)
        if _usable(A, p):
            log.debug("choose_A repaired %d entries after %d candidates", len(subset), tried)
            return IntegerCoeffMatrix(A, total)
        j = subset[-1]
        if j + 1 < n:
            heapq.heappush(heap, (total + float(c[j + 1]), subset + (j + 1,)))
            heapq.heappush(heap, (total - float(c[j]) + float(c[j + 1]), subset[:-1] + (j + 1,)))
    raise UnfixableChannelError(f"no full-rank integer approximation found after {tried} candidates")


def _gauss_mass(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """P(a <= Z < b) for standard normal Z, via the tail on the far side."""
    upper = a >= 0
    return np.where(upper, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))


def _mixture_centers(d: np.ndarray, params: LatticeParams) -> np.ndarray:
    """All values of ``sum_l d_l x_l`` over the p^len(d) equiprobable inputs."""
    T = params.constellation()
    centers = np.zeros(1)
    for dl in d:
        centers = (centers[:, None] + dl * T[None, :]).ravel()
    return centers


def _folded_pmf(centers: np.ndarray, params: LatticeParams, tail: float = FOLD_TAIL,
                chunk: int = 1 << 15) -> np.ndarray:
    kappa, p = params.kappa, params.p
    W = -float(ndtri(tail / 2.0))
    out = np.zeros(p)
    for s in range(0, centers.size, chunk):
        mu = centers[s:s + chunk]
        kmin = int(np.floor((mu.min() - W) / kappa + 0.5))
        kmax = int(np.floor((mu.max() + W) / kappa + 0.5))
        k = np.arange(kmin, kmax + 1)
        lo = kappa * (k - 0.5)[None, :] - mu[:, None]
        mass = _gauss_mass(lo, lo + kappa).sum(axis=0)
        out += np.bincount(np.mod(k, p), weights=mass, minlength=p)
    return out / centers.size


def effective_noise_pmf(h_row, a_row, params: LatticeParams, *, mixture_cap: int = MIXTURE_CAP,
                        mc_samples: int = MC_PMF_SAMPLES, seed: int | None = 0) -> Pmf:
    """Pmf of the effective noise symbol of one receive antenna.

    The residual ``e = sum_l (h_l - a_l) x_l`` is a uniform mixture over all
    transmit symbol vectors; for each mixture centre the Gaussian mass of
    every coding-lattice cell is accumulated into the symbol ``k mod p``,
    covering all cells until the neglected tail is below ``1e-12``.  Inputs
    with ``h_l == a_l`` do not move the centre and are not enumerated.

    When the mixture has more than ``mixture_cap`` centres the pmf is instead
    estimated from ``mc_samples`` draws and the result has ``method == "mc"``.
    """
    d = np.asarray(h_row, dtype=float).ravel() - np.asarray(a_row, dtype=float).ravel()
    if not np.all(np.isfinite(d)):
        raise ValueError("h - a must be finite")
    d = d[d != 0.0]
    if d.size and params.p ** d.size > mixture_cap:
        rng = substream(seed, 0xE1)
        c = rng.integers(0, params.p, size=(mc_samples, d.size))
        y = modulate(c, params) @ d + rng.standard_normal(mc_samples)
        sym = np.mod(np.floor(y / params.kappa + 0.5).astype(np.int64), params.p)
        freq = np.bincount(sym, minlength=params.p) / mc_samples
        return Pmf(freq, method="mc", samples=mc_samples)
    return Pmf(_folded_pmf(_mixture_centers(d, params), params))


@dataclass(frozen=True, eq=False)
class FiniteChannel:
    """Linear channel ``u = Q c (+) z~`` over Z_p with per-antenna noise marginals."""

    Q: GfMatrix
    noise_pmfs: tuple[Pmf, ...]
    A: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pmfs = tuple(self.noise_pmfs)
        object.__setattr__(self, "noise_pmfs", pmfs)
        if len(pmfs) != self.Q.rows:
            raise ValueError(f"need {self.Q.rows} noise pmfs, got {len(pmfs)}")
        if any(len(f) != self.Q.p for f in pmfs):
            raise ValueError(f"noise pmfs must be over Z_{self.Q.p}")

    @classmethod
    def symmetric(cls, Q: GfMatrix, eps: Sequence[float] | float) -> FiniteChannel:
        """p-ary symmetric noise with crossover ``eps[m]`` on antenna ``m``."""
        eps = np.broadcast_to(np.asarray(eps, dtype=float), (Q.rows,))
        return cls(Q, tuple(Pmf.symmetric(float(e), Q.p) for e in eps))

    @property
    def p(self) -> int:
        return self.Q.p

    @property
    def n_r(self) -> int:
        return self.Q.rows

    @property
    def n_t(self) -> int:
        return self.Q.cols

    @property
    def eps(self) -> np.ndarray:
        return np.array([f.error_prob for f in self.noise_pmfs])

    @property
    def entropies(self) -> np.ndarray:
        return np.array([f.entropy() for f in self.noise_pmfs])

    def take_rows(self, idx) -> FiniteChannel:
        idx = list(idx)
        return FiniteChannel(self.Q.take_rows(idx), tuple(self.noise_pmfs[i] for i in idx),
                             None if self.A is None else self.A[idx], dict(self.meta))


def transform(ch: RealChannel, **pmf_kwargs) -> FiniteChannel:
    """Reduce a real channel to its finite-field model."""
    coeff = choose_A(ch)
    params = ch.params
    pmfs = tuple(effective_noise_pmf(ch.H[m], coeff.A[m], params, **pmf_kwargs) for m in range(ch.n_r))
    meta = {"kappa": params.kappa, "added_error": coeff.added_error,
            "pmf_method": sorted({f.method for f in pmfs})}
    return FiniteChannel(coeff.Q(ch.p), pmfs, coeff.A, meta)


def simulate_receive(ch: RealChannel, A: IntegerCoeffMatrix | np.ndarray, c, rng_seed: int | None = None,
                     *, z=None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Run the physical pipeline: modulate, ``y = H x + z``, sawtooth ADC, demodulate.

    ``c`` is a length-``N_t`` message or a ``(trials, N_t)`` batch.  Noise is
    drawn from ``rng`` (or a generator seeded by ``rng_seed``) unless ``z`` is
    given explicitly.  ``A`` does not enter the physics; it is accepted so
    callers hold the pair that defines ``Q``, and only its shape is checked.
    """
    A_arr = A.A if isinstance(A, IntegerCoeffMatrix) else np.asarray(A)
    if A_arr.shape != ch.H.shape:
        raise ValueError(f"A has shape {A_arr.shape}, H has {ch.H.shape}")
    c = np.asarray(c, dtype=np.int64)
    single = c.ndim == 1
    C = np.atleast_2d(c)
    if C.shape[1] != ch.n_t:
        raise ValueError(f"message length {C.shape[1]} != N_t = {ch.n_t}")
    params = ch.params
    x = modulate(C, params)
    if z is None:
        rng = rng if rng is not None else substream(rng_seed)
        z = rng.standard_normal((C.shape[0], ch.n_r))
    z = np.broadcast_to(np.asarray(z, dtype=float), (C.shape[0], ch.n_r))
    y = x @ ch.H.T + z
    u = demodulate(sawtooth(y, params), params)
    return u[0] if single else u


def sample_noise_symbols(ch: RealChannel, A: IntegerCoeffMatrix, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Draw uniform messages, run the pipeline and return ``u - Q c`` per trial."""
    C = rng.integers(0, ch.p, size=(trials, ch.n_t))
    u = simulate_receive(ch, A, C, rng=rng)
    return np.mod(u - C @ A.A.T, ch.p)
