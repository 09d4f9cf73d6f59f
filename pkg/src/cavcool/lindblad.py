"""Interaction-picture Hamiltonian and master-equation integration (brute-force oracle)."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import IntegrationError, LayoutMismatchError, ParameterError
from .integrators import n_steps
from .params import ModelParams
from .quantum_core import (
    TRUNCATION_WARN,
    Operator,
    QuantumState,
    SpaceLayout,
    annihilation_truncated,
    displaced_thermal_dm,
    embed,
    fock_dm,
    ladder_operators,
    product_state,
    truncation_report,
)

DT_SAFETY = 0.05


def build_h_vib(params: ModelParams, layout: SpaceLayout) -> Operator:
    """sum_i nu b_i^dag b_i + mu (b_i + b_i^dag)^3, zero-point energy dropped."""
    ops = ladder_operators(layout)
    h = np.zeros((layout.total_dim,) * 2, dtype=complex)
    for b in ops.b:
        x = b.matrix + b.matrix.conj().T
        h += params.nu * (b.matrix.conj().T @ b.matrix) + params.mu * (x @ x @ x)
    return Operator(h, layout)


def _position_coupling(params, layout, i, exact):
    """eta*g*(b+b^dag) for particle i, or g*sin(eta*(b+b^dag)) when ``exact``."""
    n_b = layout.phonon_cutoff
    a = annihilation_truncated(n_b).matrix
    x = a + a.conj().T
    if exact:
        w, v = np.linalg.eigh(x)
        local = params.g * (v * np.sin(params.eta * w)) @ v.conj().T
    else:
        local = params.eta * params.g * x
    return embed(local, layout.phonon(i), layout).matrix


def build_h_interaction(params: ModelParams, layout: SpaceLayout, exact_coupling: bool = False) -> Operator:
    """Full interaction-picture Hamiltonian H_I including H_vib.

    ``exact_coupling`` swaps the Lamb-Dicke linearised coupling for the
    matrix sine; it is a diagnostic for the linearisation error only.
    """
    ops = ladder_operators(layout)
    c = ops.c.matrix
    h = params.delta * (c.conj().T @ c)
    for i, sm in enumerate(ops.sm):
        s = sm.matrix
        v = 0.5 * params.Omega * s + _position_coupling(params, layout, i, exact_coupling) @ c @ s.conj().T
        h = h + v + v.conj().T
    h = h + build_h_vib(params, layout).matrix
    return Operator(h, layout)


def jump_operators(params: ModelParams, layout: SpaceLayout) -> list[np.ndarray]:
    """sqrt(rate) * L for the cavity leak and every atomic decay channel."""
    ops = ladder_operators(layout)
    jumps = [np.sqrt(params.kappa) * ops.c.matrix]
    jumps += [np.sqrt(params.Gamma) * s.matrix for s in ops.sm]
    return jumps


def lindblad_rhs(state: QuantumState, params: ModelParams, layout: SpaceLayout, exact_coupling=False) -> np.ndarray:
    """d(rho)/dt written term by term as in the master equation (dense reference form)."""
    if state.layout != layout:
        raise LayoutMismatchError("state layout differs from the requested layout")
    rho = state.rho
    h = build_h_interaction(params, layout, exact_coupling).matrix
    out = -1j * (h @ rho - rho @ h)
    for rate, ops in ((params.kappa, [ladder_operators(layout).c.matrix]),
                      (params.Gamma, [s.matrix for s in ladder_operators(layout).sm])):
        for L in ops:
            Ld = L.conj().T
            LdL = Ld @ L
            out += 0.5 * rate * (2 * L @ rho @ Ld - LdL @ rho - rho @ LdL)
    return out


class Liouvillian:
    """Precomputed generator used by :func:`evolve`.

    Stores H_eff = H - (i/2) sum L^dag L and the jump operators in CSR form;
    the state itself stays dense.  Valid for Hermitian rho only, which is
    what the integrator feeds it.
    """

    def __init__(self, params: ModelParams, layout: SpaceLayout, exact_coupling=False):
        self.params = params
        self.layout = layout
        h = build_h_interaction(params, layout, exact_coupling).matrix
        jumps = jump_operators(params, layout)
        heff = h - 0.5j * sum(L.conj().T @ L for L in jumps)
        self._heff = sp.csr_matrix(heff)
        self._jumps = [sp.csr_matrix(L) for L in jumps if np.any(L)]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        a = -1j * (self._heff @ rho)
        out = a + a.conj().T
        for L in self._jumps:
            # L rho L^dag = L (L rho^dag)^dag with rho Hermitian
            out += L @ (L @ rho).conj().T
        return out


def initial_state(layout: SpaceLayout, m0: float = 0.0, alpha: complex = 0.0) -> QuantumState:
    """Atoms in |0>, cavity in vacuum, each phonon mode thermal at ``m0`` displaced by ``alpha``."""
    ph = displaced_thermal_dm(m0, alpha, layout.phonon_cutoff)
    return product_state(
        layout,
        atoms=[fock_dm(0, 2)] * layout.n_atoms,
        phonons=[ph] * layout.n_atoms,
        cavity=fock_dm(0, layout.cavity_cutoff),
    )


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    max_edge_population: float = 0.0
    trace_drift: float = 0.0
    notes: list = field(default_factory=list)


def check_dt(params: ModelParams, layout: SpaceLayout, dt: float):
    limit = DT_SAFETY / params.fastest_rate(layout.n_atoms)
    if dt <= 0 or dt > limit * (1 + 1e-12):
        raise ParameterError(f"dt = {dt} must lie in (0, {limit:.4g}] to resolve the fastest rate")


def evolve_iter(state0: QuantumState, params: ModelParams, t_final: float, dt: float, stride: int = 1,
                exact_coupling=False, trace_tol=1e-8, herm_tol=1e-10, psd_tol=1e-6, check_positivity=True):
    """Yield (t, QuantumState) every ``stride`` RK4 steps, starting with t = 0 and ending at t_final."""
    layout = state0.layout
    check_dt(params, layout, dt)
    if t_final < 0:
        raise ParameterError(f"t_final must be >= 0, got {t_final}")
    gen = Liouvillian(params, layout, exact_coupling)
    n, h = n_steps(t_final, dt)
    rho = np.array(state0.rho)
    yield 0.0, state0
    for k in range(1, n + 1):
        k1 = gen(rho)
        k2 = gen(rho + 0.5 * h * k1)
        k3 = gen(rho + 0.5 * h * k2)
        k4 = gen(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if k % stride and k != n:
            continue
        drift = abs(np.trace(rho) - 1)
        if not np.isfinite(drift) or drift > trace_tol:
            raise IntegrationError(f"trace drift {drift:.3e} exceeds {trace_tol:g}", step=k)
        asym = np.max(np.abs(rho - rho.conj().T))
        if asym > herm_tol:
            raise IntegrationError(f"Hermiticity lost (asymmetry {asym:.3e})", step=k)
        st = QuantumState(rho.copy(), layout)
        if check_positivity and st.min_eigenvalue < -psd_tol:
            raise IntegrationError(f"negative eigenvalue {st.min_eigenvalue:.3e}", step=k)
        yield k * h, st


def evolve(state0: QuantumState, params: ModelParams, t_final: float, dt: float, stride: int = 1,
           **kwargs) -> Trajectory:
    times, states = [], []
    edge, drift = 0.0, 0.0
    for t, st in evolve_iter(state0, params, t_final, dt, stride, **kwargs):
        times.append(t)
        states.append(st)
        edge = max(edge, truncation_report(st, warn=False).worst)
        drift = max(drift, abs(np.trace(st.rho) - 1))
    traj = Trajectory(np.array(times), states, edge, drift)
    if edge > TRUNCATION_WARN:
        msg = f"highest Fock state population reached {edge:.2e}; results may be biased by truncation"
        traj.notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return traj
