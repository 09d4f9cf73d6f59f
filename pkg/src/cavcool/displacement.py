"""Classical free evolution in the cubic-corrected trap (laser off).

With hbar = M = 1 the single-particle energy is

    E(x, p) = p^2/2 + nu^2 x^2/2 + k x^3,     k = mu (2 nu)^{3/2},

and a particle starting with m phonons has E = nu m.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import EscapeOrbitError, ParameterError
from .integrators import n_steps, yoshida_step
from .params import ModelParams


def cubic_coefficient(params: ModelParams) -> float:
    return params.mu * (2 * params.nu) ** 1.5


def potential(x, params: ModelParams):
    return 0.5 * params.nu ** 2 * x ** 2 + cubic_coefficient(params) * x ** 3


def force(x, params: ModelParams):
    return -params.nu ** 2 * x - 3 * cubic_coefficient(params) * x ** 2


def energy(x, p, params: ModelParams):
    return 0.5 * p ** 2 + potential(x, params)


def barrier(params: ModelParams) -> tuple[float, float]:
    """(position, height) of the local maximum of the cubic potential; (inf, inf) if harmonic."""
    k = cubic_coefficient(params)
    if k == 0:
        return float("inf"), float("inf")
    xb = -params.nu ** 2 / (3 * k)
    return xb, float(potential(xb, params))


def turning_points(m0: float, params: ModelParams) -> tuple[float, float]:
    """Zero-momentum points (x_min, x_max) of the orbit with energy nu*m0."""
    if m0 < 0:
        raise ParameterError(f"m0 must be >= 0, got {m0}")
    if m0 == 0:
        return 0.0, 0.0
    nu = params.nu
    E = nu * m0
    amp = np.sqrt(2 * E) / nu
    k = cubic_coefficient(params)
    if k == 0:
        return -amp, amp
    xb, vb = barrier(params)
    if E >= vb:
        raise EscapeOrbitError(f"energy nu*m0 = {E:.4g} reaches the cubic barrier {vb:.4g}: the trap no longer confines")

    def f(x):
        return potential(x, params) - E

    # the cubic term pushes the far root outward on the barrier side and inward on the other
    lo, hi = (xb, 0.0), (0.0, amp)
    if k < 0:
        lo, hi = (-amp, 0.0), (0.0, xb)
    x_min = brentq(f, *lo, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    x_max = brentq(f, *hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    scale = 1e-12 * nu * max(m0, 1.0)
    if abs(f(x_min)) > scale or abs(f(x_max)) > scale:
        raise ParameterError("turning-point root finding did not converge")
    return float(x_min), float(x_max)


def mean_position(m0: float, params: ModelParams, order: str = "midpoint") -> float:
    """Ensemble position after displacement: turning-point midpoint or its first-order closed form."""
    if order == "midpoint":
        x_min, x_max = turning_points(m0, params)
        return 0.5 * (x_min + x_max)
    if order == "first_order":
        if m0 < 0:
            raise ParameterError(f"m0 must be >= 0, got {m0}")
        nu = params.nu
        return -(4 * params.mu / nu) * np.sqrt(2 / nu) * m0
    raise ValueError(f"order must be 'midpoint' or 'first_order', got {order!r}")


def coherence_after_displacement(m0: float, params: ModelParams) -> float:
    if m0 < 0:
        raise ParameterError(f"m0 must be >= 0, got {m0}")
    return (4 * params.mu / params.nu) ** 2 * m0 ** 2


@dataclass(frozen=True)
class ClassicalTrajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    E: np.ndarray

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.E - self.E[0])) / abs(self.E[0])) if self.E[0] else 0.0

    def extrema(self) -> tuple[np.ndarray, np.ndarray]:
        """Refined (maxima, minima) of x, from parabolas through the samples bracketing p = 0."""
        maxima, minima = [], []
        for k in range(1, len(self.x) - 1):
            if self.x[k] >= self.x[k - 1] and self.x[k] > self.x[k + 1]:
                maxima.append(_parabola_peak(self.x[k - 1:k + 2]))
            elif self.x[k] <= self.x[k - 1] and self.x[k] < self.x[k + 1]:
                minima.append(_parabola_peak(self.x[k - 1:k + 2]))
        return np.array(maxima), np.array(minima)

    def peak_times(self) -> np.ndarray:
        ks = [k for k in range(1, len(self.x) - 1) if self.x[k] >= self.x[k - 1] and self.x[k] > self.x[k + 1]]
        return self.t[ks]

    def time_average_x(self) -> float:
        """Mean of x over the whole number of periods between the first and last maximum."""
        ks = [k for k in range(1, len(self.x) - 1) if self.x[k] >= self.x[k - 1] and self.x[k] > self.x[k + 1]]
        if len(ks) < 2:
            raise ParameterError("need at least two maxima to average over full periods")
        a, b = ks[0], ks[-1]
        return float(np.trapezoid(self.x[a:b + 1], self.t[a:b + 1]) / (self.t[b] - self.t[a]))

    def rows(self):
        return zip(self.t, self.x, self.p, self.E)


def _parabola_peak(y3) -> float:
    y0, y1, y2 = y3
    den = y0 - 2 * y1 + y2
    if den == 0:
        return float(y1)
    off = 0.5 * (y0 - y2) / den
    return float(y1 - 0.25 * (y0 - y2) * off)


def classical_trajectory(x0: float, p0: float, params: ModelParams, t_final: float, dt: float | None = None,
                         stride: int = 1) -> ClassicalTrajectory:
    """Symplectic (4th-order Yoshida leapfrog) integration of one particle in the cubic trap."""
    E0 = energy(x0, p0, params)
    xb, vb = barrier(params)
    if E0 >= vb:
        raise EscapeOrbitError(f"initial energy {E0:.4g} is above the cubic barrier {vb:.4g}")
    dt = 2 * np.pi / params.nu / 1000 if dt is None else dt
    n, h = n_steps(t_final, dt)

    def F(x):
        return force(x, params)

    ts, xs, ps = [0.0], [x0], [p0]
    x, p = float(x0), float(p0)
    barrier_side = np.sign(xb) if np.isfinite(xb) else 0.0
    for k in range(1, n + 1):
        x, p = yoshida_step(x, p, F, h)
        if barrier_side and x * barrier_side > abs(xb):
            raise EscapeOrbitError(f"particle crossed the barrier at t = {k * h:.4g}")
        if k % stride == 0 or k == n:
            ts.append(k * h)
            xs.append(x)
            ps.append(p)
    ts, xs, ps = np.array(ts), np.array(xs), np.array(ps)
    return ClassicalTrajectory(ts, xs, ps, energy(xs, ps, params))


def orbit_from_phonons(m0: float, params: ModelParams, periods: float = 100.0, dt=None) -> ClassicalTrajectory:
    """Trajectory started at the trap centre with energy nu*m0."""
    p0 = np.sqrt(2 * params.nu * m0)
    return classical_trajectory(0.0, p0, params, periods * 2 * np.pi / params.nu, dt)


def phase_averaged_position(m0: float, params: ModelParams, n_samples: int = 2000, seed: int = 0) -> float:
    """Ensemble <x> over particles on the same orbit with uniformly random phases.

    Converges to the orbit time average, which for the cubic trap is 3/2 of
    the turning-point midpoint at leading order in mu/nu.
    """
    traj = orbit_from_phonons(m0, params, periods=1.05)
    tp = traj.peak_times()
    period = float(tp[1] - tp[0]) if len(tp) > 1 else 2 * np.pi / params.nu
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, period, n_samples)
    return float(np.mean(np.interp(phases, traj.t, traj.x)))


@dataclass(frozen=True)
class DisplacementResult:
    x_min: float
    x_max: float
    x_mean: float
    zeta_end: float
    m_end: float
    period: float


def run_displacement(m0: float, params: ModelParams, integrate: bool = False, periods: float = 100.0) -> DisplacementResult:
    """Outcome of one displacement stage starting from zeta = 0 at the trap centre.

    The stage is treated as long enough to dephase, so the closed forms apply
    at its end.  With ``integrate`` the orbit is also integrated and m_end /
    period are taken from it.
    """
    x_min, x_max = turning_points(m0, params)
    zeta = coherence_after_displacement(m0, params)
    m_end, period = m0, 2 * np.pi / params.nu
    if integrate and m0 > 0:
        traj = orbit_from_phonons(m0, params, periods)
        m_end = float(traj.E[-1] / params.nu)
        tp = traj.peak_times()
        if len(tp) > 1:
            period = float(np.mean(np.diff(tp)))
    return DisplacementResult(x_min, x_max, 0.5 * (x_min + x_max), zeta, m_end, period)
