"""One-dimensional nested lattices, lattice modulation and the sawtooth ADC.

The coding lattice is ``kappa * Z`` and the shaping lattice ``kappa * p * Z``.
The constellation holds the ``p`` coding-lattice points of the shaping
Voronoi cell, and every map here works on the integer coordinate ``n`` of a
point ``kappa * n`` so that lattice points are handled exactly.

Coset representatives: for odd ``p`` the cell boundary ``+-kappa*p/2`` is not
a lattice point, so the representative set is ``{-(p-1)/2, ..., (p-1)/2}``
regardless of which end of the cell is closed.  For ``p = 2`` the boundary is
hit, and the representative set ``{0, 1}`` is used, giving the on-off keying
alphabet ``{0, kappa}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gfmat import check_prime

SNAP_TOL = 1e-9


def kappa_of(p: int, snr: float) -> float:
    """Lattice scale for a transmit-power constraint ``snr`` (linear)."""
    check_prime(p)
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    if p == 2:
        return math.sqrt(2.0 * snr)
    return math.sqrt(12.0 * snr) / p


@dataclass(frozen=True)
class LatticeParams:
    """Field size, SNR and the derived lattice scale ``kappa``.

    ``kappa`` is normally derived from ``(p, snr)``; passing it explicitly
    overrides that (useful for unit-scale tests).
    """

    p: int
    snr: float = 1.0
    kappa: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        check_prime(self.p)
        if self.kappa is None:
            object.__setattr__(self, "kappa", kappa_of(self.p, self.snr))
        elif not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    @classmethod
    def with_kappa(cls, p: int, kappa: float) -> LatticeParams:
        """Parameters with a fixed scale; ``snr`` is back-computed."""
        snr = kappa**2 / 2.0 if p == 2 else (kappa * p) ** 2 / 12.0
        return cls(p=p, snr=snr, kappa=kappa)

    @property
    def period(self) -> float:
        """Shaping-lattice spacing ``kappa * p``."""
        return self.kappa * self.p

    @property
    def half(self) -> int:
        return (self.p - 1) // 2

    def constellation(self) -> np.ndarray:
        """The ``p`` constellation points, indexed by the field element they carry."""
        return modulate(np.arange(self.p), self)


def reduce_index(n, p: int):
    """Coset representative of integer(s) ``n`` modulo ``p``."""
    h = (p - 1) // 2
    return np.mod(np.asarray(n) + h, p) - h


def coarse_index(y, params: LatticeParams):
    """Integer coordinate of the nearest coding-lattice point.

    Ties between two lattice points round toward ``+inf``.
    """
    return np.floor(np.asarray(y, dtype=float) / params.kappa + 0.5).astype(np.int64)


def sawtooth(y, params: LatticeParams):
    """The p-level sawtooth ADC: nearest coding-lattice point, reduced modulo
    the shaping lattice.  Accepts scalars or arrays."""
    out = params.kappa * reduce_index(coarse_index(y, params), params.p)
    return float(out) if np.ndim(out) == 0 else out


def modulate(u, params: LatticeParams):
    """Lattice modulation ``Z_p -> T``."""
    u = np.asarray(u, dtype=np.int64)
    if np.any((u < 0) | (u >= params.p)):
        raise ValueError(f"symbols must lie in [0, {params.p})")
    out = params.kappa * reduce_index(u, params.p)
    return float(out) if np.ndim(out) == 0 else out


def demodulate(v, params: LatticeParams):
    """Lattice demodulation ``T -> Z_p``.

    Raises ``ValueError`` if an input is not within :data:`SNAP_TOL` of a
    constellation point; ADC outputs always are, so this flags a pipeline bug.
    """
    v = np.asarray(v, dtype=float)
    n = np.rint(v / params.kappa)
    if np.any(np.abs(v - params.kappa * n) > SNAP_TOL):
        raise ValueError("value is not a coding-lattice point")
    n = n.astype(np.int64)
    if np.any(reduce_index(n, params.p) != n):
        raise ValueError("value lies outside the shaping Voronoi cell")
    out = np.mod(n, params.p)
    return int(out) if out.ndim == 0 else out


def adc_symbols(y, params: LatticeParams):
    """Sawtooth ADC followed by demodulation, fused: the field symbol of ``y``.

    Equivalent to ``demodulate(sawtooth(y))`` but skips the float round trip.
    """
    return np.mod(coarse_index(y, params), params.p)
