"""Physical parameters of the atom–cavity–trap system.

All rates are angular frequencies with hbar = M = 1.  The defaults are in
units of the trap frequency (nu = 1) and sit in the regime where the
collective rate equations apply: N*eta*g, nu, Omega, Gamma, kappa >> mu, eta*g.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, fields, replace

from .errors import ParameterError

MU_HARD_LIMIT = 0.2
MU_WARN_LIMIT = 0.05

RATE_FIELDS = ("Omega", "g", "nu", "mu", "kappa", "Gamma", "gamma_c", "c_floor")


@dataclass(frozen=True)
class ModelParams:
    N: int = 100
    Omega: float = 0.3
    g: float = 2.0
    eta: float = 0.02
    nu: float = 1.0
    mu: float = 0.01
    delta: float = 1.0
    kappa: float = 0.3
    Gamma: float = 1.0
    gamma_c: float = 0.0
    # placeholder; the true value comes from the single-particle sideband theory
    c_floor: float = 1e-4

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"parameter {f.name} must be a finite number, got {v!r}")
        if self.N < 1 or int(self.N) != self.N:
            raise ParameterError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        for name in RATE_FIELDS:
            if getattr(self, name) < 0:
                raise ParameterError(f"rate {name} must be >= 0, got {getattr(self, name)}")
        if not 0 <= self.eta < 1:
            raise ParameterError(f"Lamb-Dicke parameter eta must lie in [0, 1), got {self.eta}")
        if self.mu > MU_HARD_LIMIT * self.nu:
            raise ParameterError(
                f"mu = {self.mu} violates the slight-anharmonicity constraint mu <= {MU_HARD_LIMIT} * nu (nu = {self.nu})"
            )
        if self.mu > MU_WARN_LIMIT * self.nu:
            warnings.warn(f"mu/nu = {self.mu / self.nu:.3g} > {MU_WARN_LIMIT}: first-order results in mu/nu degrade",
                          RuntimeWarning, stacklevel=3)

    @property
    def gamma(self):
        """gamma_n = kappa + n*Gamma, as a callable."""
        return lambda n: self.kappa + n * self.Gamma

    def fastest_rate(self, n_atoms: int | None = None) -> float:
        n = self.N if n_atoms is None else n_atoms
        return max(self.nu, abs(self.delta), self.kappa, self.Gamma, self.Omega, n * self.eta * self.g)

    def replace(self, **changes) -> ModelParams:
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)
