"""Expectation values of the Hermitian B/Sigma/C operator basis.

For particle i the basis is

    B_0 = 1, B_1 = b^dag b, B_2 = b + b^dag, B_3 = i(b - b^dag)

and likewise Sigma_a for the atom (with sigma^-) and C_a for the cavity.
Multi-particle averages are evaluated on reduced density matrices, so the
cost does not grow with the number of operator products.
"""
from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field

import numpy as np

from .errors import LayoutMismatchError, ValidationError
from .lindblad import build_h_interaction, jump_operators
from .params import ModelParams
from .quantum_core import Operator, QuantumState, SpaceLayout, annihilation_truncated, embed

IMAG_TOL = 1e-10

X_INDICES = tuple((a, b, c) for a in (2, 3) for b in range(4) for c in (2, 3))
Y_INDICES = tuple((a, b) for a in (2, 3) for b in (2, 3))
Z_INDICES = tuple((a, b, c, d) for a in (2, 3) for b in (2, 3) for c in range(4) for d in range(4))


def basis_matrices(dim: int) -> tuple[np.ndarray, ...]:
    """(1, a^dag a, a + a^dag, i(a - a^dag)) for a truncated mode of dimension ``dim``."""
    a = annihilation_truncated(dim).matrix
    ad = a.conj().T
    return (np.eye(dim, dtype=complex), ad @ a, a + ad, 1j * (a - ad))


def basis_operator(kind: str, index: int, layout: SpaceLayout, particle: int = 0) -> Operator:
    """Embedded B_index^(particle), Sigma_index^(particle) or C_index (``kind`` in 'B', 'S', 'C')."""
    if kind == "B":
        return embed(basis_matrices(layout.phonon_cutoff)[index], layout.phonon(particle), layout)
    if kind == "S":
        return embed(basis_matrices(2)[index], layout.atom(particle), layout)
    if kind == "C":
        return embed(basis_matrices(layout.cavity_cutoff)[index], layout.cavity, layout)
    raise ValueError(f"unknown basis kind {kind!r}")


def partial_trace(rho: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]) -> np.ndarray:
    """Reduced density matrix on the subsystems ``keep`` (returned in ascending order)."""
    keep = tuple(sorted(keep))
    n = len(dims)
    letters = string.ascii_letters
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for k in range(n):
        if k not in keep:
            col[k] = row[k]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    t = np.einsum("".join(row) + "".join(col) + "->" + out, rho.reshape(dims + dims))
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


class _LocalExpect:
    """Expectation values of products of local operators, with reduced states cached."""

    def __init__(self, state: QuantumState):
        self.state = state
        self.dims = state.layout.dims
        self._cache = {}

    def __call__(self, factors: dict[int, np.ndarray]) -> complex:
        keep = tuple(sorted(factors))
        if keep not in self._cache:
            self._cache[keep] = partial_trace(self.state.rho, self.dims, keep)
        red = self._cache[keep]
        op = np.ones((1, 1), dtype=complex)
        for k in keep:
            op = np.kron(op, factors[k])
        return complex(np.sum(red * op.T))


def _real(val: complex, what: str, tol=IMAG_TOL) -> float:
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ValidationError(f"{what} has imaginary residue {val.imag:.3e}")
    return float(val.real)


def mean_phonon(state: QuantumState, layout: SpaceLayout | None = None) -> float:
    lay = _layout(state, layout)
    num = basis_matrices(lay.phonon_cutoff)[1]
    ex = _LocalExpect(state)
    return _real(sum(ex({lay.phonon(i): num}) for i in range(lay.n_atoms)) / lay.n_atoms, "m")


def phonon_coherence(state: QuantumState, layout: SpaceLayout | None = None) -> float:
    """zeta = (1/(N(N-1))) sum_{i != j} <b_i^dag b_j>; exactly 0 for a single particle."""
    lay = _layout(state, layout)
    n = lay.n_atoms
    if n < 2:
        return 0.0
    a = annihilation_truncated(lay.phonon_cutoff).matrix
    ex = _LocalExpect(state)
    tot = 0j
    for i, j in itertools.permutations(range(n), 2):
        tot += ex({lay.phonon(i): a.conj().T, lay.phonon(j): a})
    return _real(tot / (n * (n - 1)), "zeta")


@dataclass(frozen=True)
class PositionCoherence:
    zeta: float
    from_position: float
    mean_position: float

    @property
    def mismatch(self) -> float:
        return abs(self.zeta - self.from_position)

    def agrees(self, tol: float = 1e-6) -> bool:
        return self.mismatch <= tol * max(1.0, abs(self.zeta))


def position_coherence_check(state: QuantumState, params: ModelParams, layout: SpaceLayout | None = None) -> PositionCoherence:
    """Compare zeta with (nu/2)<x>^2, where <x> is the particle-averaged position.

    The two coincide for identical product states with vanishing momentum;
    otherwise the mismatch documents where the relation stops applying.
    """
    lay = _layout(state, layout)
    b2 = basis_matrices(lay.phonon_cutoff)[2]
    ex = _LocalExpect(state)
    mean_b2 = _real(sum(ex({lay.phonon(i): b2}) for i in range(lay.n_atoms)) / lay.n_atoms, "<B_2>")
    x = mean_b2 / np.sqrt(2 * params.nu)
    return PositionCoherence(phonon_coherence(state, lay), 0.5 * params.nu * x ** 2, x)


@dataclass
class ExpectationBundle:
    m: float
    zeta: float
    s: tuple[float, float, float]
    x: dict = field(default_factory=dict)
    x_tilde: dict = field(default_factory=dict)
    y_tilde: dict = field(default_factory=dict)
    u_232: float = 0.0
    u_tilde_223: float = 0.0
    z_tilde: dict = field(default_factory=dict)
    z_hat: dict | None = None

    def to_row(self) -> dict:
        row = {"m": self.m, "zeta": self.zeta}
        row.update({f"s_{k + 1}": v for k, v in enumerate(self.s)})
        row.update({"x_" + _key(k): self.x[k] for k in X_INDICES})
        row.update({"xt_" + _key(k): self.x_tilde[k] for k in X_INDICES})
        row.update({"yt_" + _key(k): self.y_tilde[k] for k in Y_INDICES})
        row["u_232"] = self.u_232
        row["ut_223"] = self.u_tilde_223
        row.update({"zt_" + _key(k): self.z_tilde[k] for k in Z_INDICES})
        if self.z_hat is not None:
            row.update({"zh_" + _key(k): self.z_hat[k] for k in Z_INDICES})
        return row

    @staticmethod
    def columns(with_hat: bool) -> list[str]:
        cols = ["m", "zeta", "s_1", "s_2", "s_3"]
        cols += ["x_" + _key(k) for k in X_INDICES]
        cols += ["xt_" + _key(k) for k in X_INDICES]
        cols += ["yt_" + _key(k) for k in Y_INDICES]
        cols += ["u_232", "ut_223"]
        cols += ["zt_" + _key(k) for k in Z_INDICES]
        if with_hat:
            cols += ["zh_" + _key(k) for k in Z_INDICES]
        return cols


def _key(idx) -> str:
    return "".join(str(i) for i in idx)


def _layout(state, layout):
    if layout is not None and layout != state.layout:
        raise LayoutMismatchError("state layout differs from the requested layout")
    return state.layout


def extract_bundle(state: QuantumState, layout: SpaceLayout | None = None) -> ExpectationBundle:
    lay = _layout(state, layout)
    n = lay.n_atoms
    B = basis_matrices(lay.phonon_cutoff)
    S = basis_matrices(2)
    C = basis_matrices(lay.cavity_cutoff)
    ex = _LocalExpect(state)
    ph, at, cav = lay.phonon, lay.atom, lay.cavity
    pairs = list(itertools.permutations(range(n), 2))
    triples = list(itertools.permutations(range(n), 3))

    def avg(terms, count, what):
        return _real(sum(terms) / count, what) if count else 0.0

    s = tuple(avg((ex({at(i): S[a]}) for i in range(n)), n, f"s_{a}") for a in (1, 2, 3))
    x = {k: avg((ex({ph(i): B[k[0]], at(i): S[k[1]], cav: C[k[2]]}) for i in range(n)), n, f"x_{_key(k)}")
         for k in X_INDICES}
    xt = {k: avg((ex({ph(i): B[k[0]], at(j): S[k[1]], cav: C[k[2]]}) for i, j in pairs), len(pairs),
                 f"xt_{_key(k)}") for k in X_INDICES}
    yt = {k: avg((ex({ph(i): B[k[0]], ph(j): B[k[1]]}) for i, j in pairs), len(pairs), f"yt_{_key(k)}")
          for k in Y_INDICES}
    zt = {k: avg((ex({ph(i): B[k[0]], ph(j): B[k[1]], at(i): S[k[2]], at(j): S[k[3]]}) for i, j in pairs),
                 len(pairs), f"zt_{_key(k)}") for k in Z_INDICES}
    zh = None
    if n >= 3:
        zh = {k: avg((ex({ph(i): B[k[0]], ph(kk): B[k[1]], at(j): S[k[2]], at(kk): S[k[3]]})
                      for i, j, kk in triples), len(triples), f"zh_{_key(k)}") for k in Z_INDICES}
    u232 = avg((ex({ph(i): B[2] @ B[3] @ B[2]}) for i in range(n)), n, "u_232")
    ut223 = avg((ex({ph(i): B[2] @ B[2], ph(j): B[3]}) for i, j in pairs), len(pairs), "ut_223")
    return ExpectationBundle(
        m=mean_phonon(state), zeta=phonon_coherence(state), s=s, x=x, x_tilde=xt, y_tilde=yt,
        u_232=u232, u_tilde_223=ut223, z_tilde=zt, z_hat=zh,
    )


def ehrenfest_rate(state: QuantumState, op: Operator, params: ModelParams, layout: SpaceLayout | None = None,
                   exact_coupling: bool = False) -> float:
    """d<A>/dt from the adjoint master equation, evaluated by traces against ``state``.

    -i<[A, H]> + sum_L <L^dag A L - (1/2){L^dag L, A}>.  ``op`` must be Hermitian.
    """
    lay = _layout(state, layout)
    if op.layout != lay:
        raise LayoutMismatchError("operator layout differs from the state layout")
    A = op.matrix
    H = build_h_interaction(params, lay, exact_coupling).matrix
    gen = -1j * (A @ H - H @ A)
    for L in jump_operators(params, lay):
        Ld = L.conj().T
        LdL = Ld @ L
        gen = gen + Ld @ A @ L - 0.5 * (A @ LdL + LdL @ A)
    val = complex(np.sum(state.rho * gen.T))
    return _real(val, "Ehrenfest rate", tol=1e-9)


__all__ = [
    "ExpectationBundle",
    "PositionCoherence",
    "basis_matrices",
    "basis_operator",
    "ehrenfest_rate",
    "extract_bundle",
    "mean_phonon",
    "partial_trace",
    "phonon_coherence",
    "position_coherence_check",
]
