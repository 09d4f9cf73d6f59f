"""Simulation of collective cavity-mediated laser cooling in an asymmetric trap.

Three tiers: a brute-force master-equation oracle on a truncated Fock space
(:mod:`cavcool.lindblad`, :mod:`cavcool.observables`), the effective rate
model (:mod:`cavcool.rate_model`) and the cyclic displacement/cooling
protocol (:mod:`cavcool.displacement`, :mod:`cavcool.protocol`).
"""
from .params import ModelParams
from .quantum_core import QuantumState, SpaceLayout, build_space
from .rate_model import collective_rate

__version__ = "0.1.0"

__all__ = ["ModelParams", "QuantumState", "SpaceLayout", "build_space", "collective_rate", "__version__"]
