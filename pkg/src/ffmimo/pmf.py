"""Probability mass functions over Z_p (or over an index set of vectors)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Pmf:
    """A normalised pmf indexed ``0 .. n-1``.

    ``method`` records how the values were obtained (``"exact"`` or ``"mc"``);
    ``samples`` is the Monte Carlo sample count when ``method == "mc"``.
    """

    probs: np.ndarray
    method: str = "exact"
    samples: int = 0

    def __post_init__(self):
        a = np.array(self.probs, dtype=float).reshape(-1)
        if a.size == 0:
            raise ValueError("empty pmf")
        if np.any(~np.isfinite(a)) or np.any(a < -NORM_TOL):
            raise ValueError("pmf entries must be finite and non-negative")
        s = float(np.sum(a))
        if abs(s - 1.0) > NORM_TOL:
            raise ValueError(f"pmf sums to {s!r}, not 1")
        a = np.clip(a, 0.0, None)
        a.setflags(write=False)
        object.__setattr__(self, "probs", a)

    @classmethod
    def point(cls, n: int, k: int = 0) -> Pmf:
        a = np.zeros(n)
        a[k] = 1.0
        return cls(a)

    @classmethod
    def uniform(cls, n: int) -> Pmf:
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def symmetric(cls, eps: float, p: int) -> Pmf:
        """p-ary symmetric noise: 0 with prob ``1-eps``, else uniform on the rest."""
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"eps must lie in [0, 1], got {eps}")
        if p == 1:
            return cls.point(1)
        a = np.full(p, eps / (p - 1))
        a[0] = 1.0 - eps
        return cls(a)

    def __len__(self):
        return self.probs.size

    def __getitem__(self, k):
        return self.probs[k]

    def __eq__(self, other):
        if not isinstance(other, Pmf):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"Pmf({np.array2string(self.probs, precision=6)})"

    @property
    def error_prob(self) -> float:
        """Mass off zero, ``P(z != 0)``."""
        return float(math.fsum(self.probs[1:]))

    def entropy(self) -> float:
        """Shannon entropy in bits.

        Terms are summed with ``math.fsum`` after sorting, so the value is
        invariant under relabelling of the support.
        """
        q = np.sort(self.probs[self.probs > 0])
        return float(max(0.0, -math.fsum(q * np.log2(q))))

    def scaled(self, a: int) -> Pmf:
        """Pmf of ``a * z`` over Z_p, where ``z ~ self`` and ``p = len(self)``."""
        p = len(self)
        a = int(a) % p
        if a == 0:
            return Pmf.point(p)
        out = np.zeros(p)
        out[(a * np.arange(p)) % p] = self.probs
        return Pmf(out, self.method, self.samples)

    def convolve(self, other: Pmf) -> Pmf:
        """Pmf of ``x + y`` (mod p) for independent ``x ~ self``, ``y ~ other``."""
        p = len(self)
        if len(other) != p:
            raise ValueError("cyclic convolution needs equal alphabet sizes")
        out = np.zeros(p)
        for k in np.nonzero(other.probs)[0]:
            out += other.probs[k] * np.roll(self.probs, k)
        return Pmf(out)

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw iid symbols by inverse-CDF lookup."""
        u = rng.random(size)
        return np.searchsorted(self.cdf(), u, side="right").astype(np.int64)


def combine(pmfs, coeffs, p: int) -> Pmf:
    """Pmf of ``sum_i coeffs[i] * z_i`` over Z_p, the ``z_i`` independent."""
    out = Pmf.point(p)
    for pmf, a in zip(pmfs, coeffs):
        if int(a) % p:
            out = out.convolve(pmf.scaled(a))
    return out
