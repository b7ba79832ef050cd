"""Finite-field MIMO receivers for low-resolution ADC channels.

The real channel ``y = Hx + z`` seen through p-level sawtooth quantizers is
reduced to ``u = Q c (+) z~`` over Z_p; the subpackages compute achievable
rates of combining and coding schemes on that model and simulate them.
"""

from .channel import FiniteChannel, IntegerCoeffMatrix, RealChannel, choose_A, effective_noise_pmf, transform
from .codes import CodebookView, md_decode, min_distance, plurality_decode, sc_order, sc_recover, zf_detect
from .errors import (CapabilityError, FfmimoError, InfeasibleSelectionError, ParseError, RankDeficientError,
                     UnfixableChannelError)
from .gfmat import FieldElem, GfMatrix, greedy_row_select, mat_inverse, mat_rank
from .lattice import LatticeParams, demodulate, modulate, sawtooth
from .pmf import Pmf
from .rates import SchemeRate

__version__ = "0.1.0"
