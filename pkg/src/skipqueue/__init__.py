"""Ergodicity bounds and limiting regimes for a time-varying queue with batch arrivals and queue skipping."""

from .batch import FiniteSupport, Geometric, GeometricTailLaw, PowerLaw
from .bounds import ErgodicityCertificate, certify, search_delta_eps
from .generator import TruncatedGenerator, WeightSequence
from .intensity import Constant, PiecewiseConstant, Sinusoid, TabulatedPositive

__all__ = [
    "Constant", "Sinusoid", "PiecewiseConstant", "TabulatedPositive",
    "Geometric", "FiniteSupport", "GeometricTailLaw", "PowerLaw",
    "TruncatedGenerator", "WeightSequence",
    "ErgodicityCertificate", "certify", "search_delta_eps",
]
