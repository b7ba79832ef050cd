"""Code-theoretic detectors for the finite-field channel ``u = Q c (+) z~``.

``Q`` is read as the generator of a linear block code of length ``N_r`` and
dimension ``N_t``.  Messages are enumerated in lexicographic order (first
component most significant); every argmin below keeps the first minimiser in
that order, so ties resolve to the lexicographically smallest message and
plurality ties to the smallest symbol.  With this shared rule minimum
distance decoding of a repetition code and plurality voting agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapabilityError, RankDeficientError
from .gfmat import GfMatrix, inv_mod, mat_inverse

EXPLICIT_CAP = 1 << 16
ENUM_CAP = 1 << 24
_CHUNK = 1 << 22  # elements per (trials x codewords x N_r) comparison block


def messages(p: int, k: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Messages ``start .. stop-1`` of ``Z_p^k`` in lexicographic order."""
    stop = p**k if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, k), dtype=np.int64)
    for j in range(k - 1, -1, -1):
        idx, out[:, j] = np.divmod(idx, p)
    return out


def message_index(c, p: int) -> np.ndarray:
    """Base-p positional index of message vector(s); inverse of :func:`messages`."""
    c = np.asarray(c, dtype=np.int64)
    w = p ** np.arange(c.shape[-1] - 1, -1, -1, dtype=np.int64)
    return c @ w


def _check_cap(p: int, k: int, cap: int):
    if p**k > cap:
        raise CapabilityError(f"{p}^{k} = {p**k} messages exceeds the enumeration cap {cap}")


class CodebookView:
    """The linear code spanned by the columns of ``Q``.

    Codewords are materialised when there are at most ``explicit_cap`` of
    them; larger codes are scanned in chunks straight from the generator.
    """

    def __init__(self, generator: GfMatrix, explicit_cap: int = EXPLICIT_CAP, enum_cap: int = ENUM_CAP):
        self.generator = generator
        self.p = generator.p
        self.n = generator.rows
        self.k = generator.cols
        self.size = self.p**self.k
        self.enum_cap = enum_cap
        _check_cap(self.p, self.k, enum_cap)
        self.codewords = self.encode(messages(self.p, self.k)) if self.size <= explicit_cap else None

    def encode(self, c) -> np.ndarray:
        return np.mod(np.asarray(c, dtype=np.int64) @ self.generator.array.T, self.p)

    def chunks(self, step: int = EXPLICIT_CAP):
        """Yield ``(first_index, codewords)`` blocks in message order."""
        if self.codewords is not None:
            yield 0, self.codewords
            return
        for s in range(0, self.size, step):
            yield s, self.encode(messages(self.p, self.k, s, min(s + step, self.size)))

    @cached_property
    def d_min(self) -> int:
        best = self.n
        for s, cw in self.chunks():
            w = np.count_nonzero(cw, axis=1)
            if s == 0:
                w = w[1:]
            if w.size:
                best = min(best, int(w.min()))
        return best

    def message(self, index) -> np.ndarray:
        """Message vector(s) with the given lexicographic index."""
        return _unindex(np.asarray(index, dtype=np.int64), self.p, self.k)


def _unindex(index: np.ndarray, p: int, k: int) -> np.ndarray:
    out = np.empty(index.shape + (k,), dtype=np.int64)
    idx = index.copy()
    for j in range(k - 1, -1, -1):
        idx, out[..., j] = np.divmod(idx, p)
    return out


def min_distance(Q: GfMatrix, cap: int = ENUM_CAP) -> int:
    """Minimum Hamming weight over the nonzero codewords generated by ``Q``.

    A rank-deficient ``Q`` maps some nonzero message to the zero word and
    therefore has minimum distance 0.
    """
    if not np.any(Q.array):
        raise ValueError("minimum distance of the zero generator is undefined")
    return CodebookView(Q, enum_cap=cap).d_min


def md_decode(cb: CodebookView, u) -> np.ndarray:
    """Minimum Hamming distance decoding, ``argmin_x d_H(Q x, u)``.

    ``u`` is one received word or a ``(trials, N_r)`` batch; returns the
    decoded message(s).
    """
    u = np.asarray(u, dtype=np.int64)
    single = u.ndim == 1
    U = np.atleast_2d(u)
    if U.shape[1] != cb.n:
        raise ValueError(f"received word length {U.shape[1]} != N_r = {cb.n}")
    T = U.shape[0]
    best_d = np.full(T, cb.n + 1, dtype=np.int64)
    best_i = np.zeros(T, dtype=np.int64)
    for s, cw in cb.chunks():
        rows = max(1, _CHUNK // max(1, cw.size))
        for t0 in range(0, T, rows):
            blk = U[t0:t0 + rows]
            d = np.count_nonzero(blk[:, None, :] != cw[None, :, :], axis=2)
            j = np.argmin(d, axis=1)
            dj = d[np.arange(blk.shape[0]), j]
            better = dj < best_d[t0:t0 + rows]
            best_d[t0:t0 + rows][better] = dj[better]
            best_i[t0:t0 + rows][better] = s + j[better]
    out = cb.message(best_i)
    return out[0] if single else out


def plurality_decode(u, q, p: int | None = None) -> np.ndarray | int:
    """Equalise each observation by its gain and take the most frequent value.

    ``u`` is one observation vector or a ``(trials, N_r)`` batch.  ``q`` is a
    single-column :class:`GfMatrix` or a sequence of gains, in which case
    ``p`` must be given.  All gains must be nonzero.
    """
    if isinstance(q, GfMatrix):
        if q.cols != 1:
            raise ValueError("plurality decoding needs a single-column channel")
        gains, p = q.array[:, 0], q.p
    else:
        if p is None:
            raise ValueError("field size p is required when q is not a GfMatrix")
        gains = np.mod(np.asarray(q, dtype=np.int64).ravel(), p)
    if np.any(gains == 0):
        raise ValueError("plurality decoding needs all channel gains nonzero")
    inv = np.array([inv_mod(g, p) for g in gains], dtype=np.int64)
    chat = np.mod(np.atleast_2d(np.asarray(u, dtype=np.int64)) * inv, p)
    counts = np.stack([np.count_nonzero(chat == s, axis=1) for s in range(p)], axis=1)
    out = np.argmax(counts, axis=1)
    return int(out[0]) if np.ndim(u) == 1 else out


def zf_detect(Q: GfMatrix, u) -> np.ndarray:
    """Zero-forcing over Z_p: ``Q^{-1} u`` (batch rows allowed)."""
    Qi = mat_inverse(Q)
    u = np.asarray(u, dtype=np.int64)
    return np.mod(u @ Qi.array.T, Q.p)


@dataclass(frozen=True, eq=False)
class ScOrdering:
    """Decode schedule for successive coding.

    Attributes
    ----------
    order : tuple of int
        Receive antennas by ascending noise entropy (ties: lower index).
    pivots : tuple of int
        ``pivots[m]`` is the stream whose code is peeled at stage ``m``; it
        carries rate ``rates[m]``.
    rates : np.ndarray
        Per-stage rate limits ``log2 p - H(z~_order[m])``; non-increasing.
    Qprime : GfMatrix
        Row-reduced system matrix: ``Qprime[m, pivots[j]] == 0`` for ``j < m``.
    L : np.ndarray
        Unit lower-triangular cancellation coefficients with
        ``Q[order] = L @ Qprime`` over Z_p.
    """

    order: tuple[int, ...]
    pivots: tuple[int, ...]
    rates: np.ndarray
    Qprime: GfMatrix
    L: np.ndarray


def sc_order(Q: GfMatrix, entropies) -> ScOrdering:
    """Entropy-ordered elimination schedule for a square invertible ``Q``.

    At stage ``m`` the reduced row of the ``m``-th best antenna keeps a
    nonzero entry in some not-yet-peeled stream (the lowest such index is the
    pivot); that entry is used to cancel the stream from all later rows.
    """
    n, k = Q.shape
    if n != k:
        raise ValueError(f"successive coding needs a square channel, got {n}x{k}")
    p = Q.p
    ent = np.asarray(entropies, dtype=float)
    order = tuple(int(i) for i in np.argsort(ent, kind="stable"))
    R = Q.array[list(order)].copy()
    L = np.eye(n, dtype=np.int64)
    pivots: list[int] = []
    for m in range(n):
        free = [j for j in range(k) if j not in pivots and R[m, j]]
        if not free:
            raise RankDeficientError(m, n, "successive coding needs an invertible channel")
        j = free[0]
        pivots.append(j)
        piv_inv = inv_mod(R[m, j], p)
        for i in range(m + 1, n):
            if R[i, j]:
                f = (R[i, j] * piv_inv) % p
                L[i, m] = f
                R[i] = (R[i] - f * R[m]) % p
    rates = np.log2(p) - ent[list(order)]
    return ScOrdering(order, tuple(pivots), rates, GfMatrix(R, p), L)


def sc_recover(fc, u, genie_noise=None) -> np.ndarray:
    """Run the successive-coding receiver on a received word (or batch of rows).

    Stage ``m`` forms ``u'_m = u_{order[m]} - sum_{j<m} L[m, j] c'_j``, then
    decodes the combination ``c'_m``.  Outer codes are idealised: decoding
    removes ``genie_noise[order[m]]`` (the true effective noise), treated as
    zero when not supplied.  The message is recovered by inverting
    ``Qprime``.  ``fc`` is a :class:`~ffmimo.channel.FiniteChannel`.
    """
    sched = sc_order(fc.Q, fc.entropies)
    p = fc.p
    u = np.asarray(u, dtype=np.int64)
    U = np.atleast_2d(u)
    Z = np.zeros_like(U) if genie_noise is None else np.atleast_2d(np.asarray(genie_noise, dtype=np.int64))
    n = U.shape[1]
    cprime = np.zeros_like(U)
    for m in range(n):
        a = sched.order[m]
        um = np.mod(U[:, a] - cprime[:, :m] @ sched.L[m, :m], p)
        cprime[:, m] = np.mod(um - Z[:, a], p)
    out = np.mod(cprime @ mat_inverse(sched.Qprime).array.T, p)
    return out[0] if u.ndim == 1 else out
