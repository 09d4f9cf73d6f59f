"""Operator algebra on the truncated atoms ⊗ phonons ⊗ cavity Hilbert space.

Basis ordering (used everywhere in the package):

    atom_0, ..., atom_{n-1}, phonon_0, ..., phonon_{n-1}, cavity

with the first factor varying slowest, i.e. the composite basis index is the
row-major (C-order) flattening of the tuple of local indices.  Atoms are
two-level systems with local index 0 = ground and 1 = excited, so that
sigma^- = |0><1| coincides with the 2x2 truncated annihilation operator.

Units: hbar = M = 1 throughout; frequencies are angular.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import factorial, prod

import numpy as np
from scipy.linalg import expm

from .errors import DimensionOverflowError, InvalidDimensionError, LayoutMismatchError, ValidationError

DEFAULT_DIM_CAP = 20000
TRUNCATION_WARN = 1e-4


@dataclass(frozen=True)
class SpaceLayout:
    n_atoms: int
    phonon_cutoff: int
    cavity_cutoff: int

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * self.n_atoms + (self.phonon_cutoff,) * self.n_atoms + (self.cavity_cutoff,)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def atom(self, i: int) -> int:
        """Subsystem index of atom ``i``."""
        self._check_particle(i)
        return i

    def phonon(self, i: int) -> int:
        self._check_particle(i)
        return self.n_atoms + i

    @property
    def cavity(self) -> int:
        return 2 * self.n_atoms

    def _check_particle(self, i):
        if not 0 <= i < self.n_atoms:
            raise IndexError(f"particle index {i} out of range for {self.n_atoms} atoms")


def build_space(n_atoms: int, n_b: int, n_c: int, cap: int = DEFAULT_DIM_CAP) -> SpaceLayout:
    if n_atoms < 1:
        raise InvalidDimensionError(f"n_atoms must be >= 1, got {n_atoms}")
    if n_b < 2 or n_c < 2:
        raise InvalidDimensionError(f"cutoffs must be >= 2, got n_b={n_b}, n_c={n_c}")
    layout = SpaceLayout(n_atoms, n_b, n_c)
    if layout.total_dim > cap:
        raise DimensionOverflowError(
            f"total dimension 2^{n_atoms} * {n_b}^{n_atoms} * {n_c} = {layout.total_dim} exceeds cap {cap}"
        )
    return layout


def _frozen(m):
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix, optionally tied to a composite layout.

    ``layout`` is None for single-subsystem operators (e.g. the output of
    :func:`annihilation_truncated`).
    """

    matrix: np.ndarray
    layout: SpaceLayout | None = None

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"operator must be square, got shape {m.shape}")
        if self.layout is not None and m.shape[0] != self.layout.total_dim:
            raise LayoutMismatchError(f"operator dim {m.shape[0]} != layout dim {self.layout.total_dim}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dag(self) -> Operator:
        return Operator(self.matrix.conj().T, self.layout)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0)) <= tol

    def _coerce(self, other):
        if isinstance(other, Operator):
            if other.layout != self.layout:
                raise LayoutMismatchError("operators live on different layouts")
            return other.matrix
        return other

    def __matmul__(self, other):
        return Operator(self.matrix @ self._coerce(other), self.layout)

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return Operator(self.matrix + self._coerce(other), self.layout)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return Operator(self.matrix - self._coerce(other), self.layout)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(scalar * self.matrix, self.layout)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(-self.matrix, self.layout)


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def annihilation_truncated(dim: int) -> Operator:
    if dim < 2:
        raise InvalidDimensionError(f"ladder operator needs dim >= 2, got {dim}")
    return Operator(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1))


def embed(op: Operator | np.ndarray, which: int, layout: SpaceLayout) -> Operator:
    """Place a single-subsystem operator at position ``which`` of ``layout``."""
    m = op.matrix if isinstance(op, Operator) else np.asarray(op, dtype=complex)
    dims = layout.dims
    if not 0 <= which < len(dims):
        raise IndexError(f"subsystem {which} out of range (layout has {len(dims)})")
    if m.shape != (dims[which], dims[which]):
        raise LayoutMismatchError(f"operator of shape {m.shape} cannot act on subsystem {which} of dimension {dims[which]}")
    left = prod(dims[:which])
    right = prod(dims[which + 1:])
    full = np.kron(np.kron(np.eye(left), m), np.eye(right))
    return Operator(full, layout)


def identity(layout: SpaceLayout) -> Operator:
    return Operator(np.eye(layout.total_dim), layout)


@dataclass(frozen=True)
class LadderSet:
    """Embedded elementary operators for one layout: b_i, sigma^-_i and c."""

    b: tuple[Operator, ...]
    sm: tuple[Operator, ...]
    c: Operator


@lru_cache(maxsize=16)
def ladder_operators(layout: SpaceLayout) -> LadderSet:
    b = annihilation_truncated(layout.phonon_cutoff)
    sm = annihilation_truncated(2)
    c = annihilation_truncated(layout.cavity_cutoff)
    return LadderSet(
        b=tuple(embed(b, layout.phonon(i), layout) for i in range(layout.n_atoms)),
        sm=tuple(embed(sm, layout.atom(i), layout) for i in range(layout.n_atoms)),
        c=embed(c, layout.cavity, layout),
    )


@dataclass(frozen=True, eq=False)
class QuantumState:
    rho: np.ndarray
    layout: SpaceLayout

    def __post_init__(self):
        rho = _frozen(self.rho)
        if rho.shape != (self.layout.total_dim,) * 2:
            raise LayoutMismatchError(f"density matrix shape {rho.shape} != layout dim {self.layout.total_dim}")
        object.__setattr__(self, "rho", rho)

    def validate(self, trace_tol=1e-10, herm_tol=1e-12, psd_tol=1e-10) -> QuantumState:
        """Raise ValidationError unless rho is a density matrix within tolerance."""
        tr = np.trace(self.rho)
        if abs(tr - 1) > trace_tol:
            raise ValidationError(f"trace {tr} deviates from 1")
        asym = np.max(np.abs(self.rho - self.rho.conj().T))
        if asym > herm_tol:
            raise ValidationError(f"density matrix not Hermitian (max asymmetry {asym:.3e})")
        lo = self.min_eigenvalue
        if lo < -psd_tol:
            raise ValidationError(f"density matrix has eigenvalue {lo:.3e}")
        return self

    @cached_property
    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.rho + self.rho.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def populations(self) -> np.ndarray:
        """Diagonal of rho reshaped to the subsystem tensor shape."""
        return np.real(np.diag(self.rho)).reshape(self.layout.dims)

    def marginal_populations(self, which: int) -> np.ndarray:
        pops = self.populations()
        axes = tuple(k for k in range(pops.ndim) if k != which)
        return pops.sum(axis=axes)


def expectation(state: QuantumState, op: Operator) -> complex:
    if op.layout != state.layout:
        raise LayoutMismatchError("state and operator live on different layouts")
    # tr(rho A) without forming the product
    return complex(np.sum(state.rho * op.matrix.T))


def real_expectation(state: QuantumState, op: Operator, tol: float = 1e-10) -> float:
    val = expectation(state, op)
    if abs(val.imag) > tol:
        raise ValidationError(f"expectation of a Hermitian operator has imaginary part {val.imag:.3e}")
    return val.real


@dataclass(frozen=True)
class TruncationReport:
    """Population of the highest retained Fock state, per bosonic mode."""

    phonon_edge: tuple[float, ...]
    cavity_edge: float

    @property
    def worst(self) -> float:
        return max(max(self.phonon_edge, default=0.0), self.cavity_edge)

    @property
    def ok(self) -> bool:
        return self.worst <= TRUNCATION_WARN


def truncation_report(state: QuantumState, warn: bool = True) -> TruncationReport:
    lay = state.layout
    ph = tuple(float(state.marginal_populations(lay.phonon(i))[-1]) for i in range(lay.n_atoms))
    cav = float(state.marginal_populations(lay.cavity)[-1])
    rep = TruncationReport(ph, cav)
    if warn and not rep.ok:
        warnings.warn(f"highest Fock state population {rep.worst:.2e} exceeds {TRUNCATION_WARN:g}; "
                      "increase the cutoff", RuntimeWarning, stacklevel=2)
    return rep


# single-mode states ----------------------------------------------------------

def fock_dm(n: int, dim: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock state {n} not representable with cutoff {dim}")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def thermal_dm(nbar: float, dim: int) -> np.ndarray:
    """Boltzmann (geometric) populations for mean occupation ``nbar``, truncated and renormalised."""
    if nbar < 0:
        raise ValidationError(f"mean occupation must be >= 0, got {nbar}")
    if nbar == 0:
        return fock_dm(0, dim)
    q = nbar / (1.0 + nbar)
    p = q ** np.arange(dim)
    return np.diag(p / p.sum()).astype(complex)


def coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    """Truncated, renormalised coherent state |alpha>."""
    n = np.arange(dim)
    amp = np.array([alpha ** k / np.sqrt(float(factorial(k))) for k in n], dtype=complex)
    amp *= np.exp(-abs(alpha) ** 2 / 2)
    return amp / np.linalg.norm(amp)


def displaced_thermal_dm(nbar: float, alpha: complex, dim: int, pad: int = 30) -> np.ndarray:
    """D(alpha) rho_th(nbar) D(alpha)^dag built on a padded space, then projected to ``dim``."""
    if alpha == 0:
        return thermal_dm(nbar, dim)
    big = dim + pad
    a = annihilation_truncated(big).matrix
    d = expm(alpha * a.conj().T - np.conj(alpha) * a)
    rho = d @ thermal_dm(nbar, big) @ d.conj().T
    rho = rho[:dim, :dim]
    return rho / np.trace(rho).real


def product_state(layout: SpaceLayout, atoms, phonons, cavity) -> QuantumState:
    """Tensor product of local density matrices given in layout order."""
    factors = list(atoms) + list(phonons) + [cavity]
    if len(factors) != len(layout.dims):
        raise LayoutMismatchError(f"expected {len(layout.dims)} factors, got {len(factors)}")
    rho = np.ones((1, 1), dtype=complex)
    for f, d in zip(factors, layout.dims):
        f = np.asarray(f, dtype=complex)
        if f.ndim == 1:
            f = np.outer(f, f.conj())
        if f.shape != (d, d):
            raise LayoutMismatchError(f"factor of shape {f.shape} does not match dimension {d}")
        rho = np.kron(rho, f)
    return QuantumState(rho, layout)
