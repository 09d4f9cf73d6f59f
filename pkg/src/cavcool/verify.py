"""Built-in invariant checks run by ``cavcool verify``."""
from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np

from . import displacement as disp
from .errors import EscapeOrbitError
from .params import ModelParams
from .protocol import continuous_envelope, floor_estimate, run_protocol, scaling_study
from .rate_model import (
    adiabatic_report,
    atomic_steady_state,
    bloch_relax,
    collective_rate,
    cooling_ode,
    resonant_rate,
    u_system_stationary,
    y_system_step,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_adiabatic(draws=200, seed=0) -> CheckResult:
    rep = adiabatic_report(draws, seed)
    ok = rep.max_rel_error < 1e-8 and rep.max_x322_ratio < 1e-10
    detail = f"max rel err {rep.max_rel_error:.2e}, max |x322/x333| {rep.max_x322_ratio:.2e}"
    if rep.systematic_factor is not None:
        detail += f", systematic factor {rep.systematic_factor:.6g}"
    return CheckResult("adiabatic elimination vs closed-form A_N", ok, detail)


def check_resonance(base: ModelParams | None = None) -> CheckResult:
    p = ModelParams() if base is None else base
    grid = np.linspace(0.1, 3.0, 500) * p.nu
    rates = np.array([collective_rate(p.replace(delta=d)).A_N for d in grid])
    step = grid[1] - grid[0]
    peak = grid[np.argmax(rates)]
    res = collective_rate(p.replace(delta=p.nu)).A_N
    closed = resonant_rate(p)
    ok = abs(peak - p.nu) <= step and abs(res - closed) <= 4 * np.finfo(float).eps * abs(closed)
    return CheckResult("A_N maximal at delta = nu", ok, f"peak at delta/nu = {peak / p.nu:.4f}, "
                       f"resonant rel diff {abs(res / closed - 1):.1e}")


def check_steady_state(draws=20, seed=1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        Om, Ga = rng.uniform(0.1, 5.0, 2)
        worst = max(worst, float(np.max(np.abs(np.subtract(bloch_relax(Om, Ga), atomic_steady_state(Om, Ga))))))
    exact = atomic_steady_state(1.0, 1.0) == (1 / 3, 0.0, 2 / 3)
    return CheckResult("atomic steady state", worst < 1e-8 and exact, f"max Bloch deviation {worst:.1e}")


def check_displacement(periods=100.0) -> CheckResult:
    """Bound orbits only; combinations above the cubic barrier are listed as escaped."""
    worst_tp, worst_id, worst_drift = 0.0, 0.0, 0.0
    escaped = []
    for ratio in (0.005, 0.01, 0.02):
        p = ModelParams(mu=ratio, nu=1.0)
        for m0 in (1.0, 5.0, 10.0):
            try:
                x_min, x_max = disp.turning_points(m0, p)
            except EscapeOrbitError:
                escaped.append(f"mu/nu={ratio:g}, m0={m0:g}")
                continue
            traj = disp.orbit_from_phonons(m0, p, periods)
            maxima, minima = traj.extrema()
            worst_tp = max(worst_tp, abs(maxima[0] / x_max - 1), abs(minima[0] / x_min - 1))
            zeta = disp.coherence_after_displacement(m0, p)
            x1 = disp.mean_position(m0, p, "first_order")
            worst_id = max(worst_id, abs(zeta - 0.5 * p.nu * x1 ** 2) / zeta)
            worst_drift = max(worst_drift, traj.energy_drift)
    ok = worst_tp < 1e-6 and worst_id < 1e-14 and worst_drift < 1e-8
    detail = f"turning pts {worst_tp:.1e}, zeta identity {worst_id:.1e}, energy drift {worst_drift:.1e}"
    if escaped:
        detail += f"; above barrier (no bound orbit): {', '.join(escaped)}"
    return CheckResult("displacement consistency", ok, detail)


def check_cooling_conservation() -> CheckResult:
    t = np.linspace(0, 50, 501)
    m, z = cooling_ode(1.0, 0.25, 0.3, t)
    inv = np.max(np.abs((m - z) - 0.75))
    m_inf, z_inf = cooling_ode(1.0, 0.25, 0.3, 1e4)
    ok = inv < 1e-12 and abs(m_inf - 0.75) < 1e-12 and z_inf == 0.0
    return CheckResult("cooling conservation m - zeta", ok, f"invariant deviation {inv:.1e}, m(inf) = {m_inf:.15g}")


def check_scaling() -> CheckResult:
    st = scaling_study(ModelParams(gamma_c=0.0), [1e2, 1e3, 1e4, 1e5, 1e6])
    ok = abs(st.slope_closed + 0.5) <= 0.002 and abs(st.slope_A - 1) <= 1e-6
    return CheckResult("1/sqrt(N) floor scaling", ok, f"m_final slope {st.slope_closed:.6f}, A_N slope {st.slope_A:.8f}")


def check_special_floor(draws=10, seed=2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        kappa, Gamma = rng.uniform(20.0, 100.0, 2)
        lim = 0.1 * min(kappa, Gamma)
        nu = float(rng.uniform(0.2, 1.0) * lim)
        p = ModelParams(N=int(rng.integers(10, 10 ** 6)), Omega=float(rng.uniform(0.1, 1.0) * lim), nu=nu,
                        delta=nu, mu=0.01 * nu, kappa=kappa, Gamma=Gamma, g=float(rng.uniform(0.5, 5)))
        f = floor_estimate(p, implied_c=True)
        target = p.kappa / (16 * p.mu * np.sqrt(p.N))
        worst = max(worst, abs(f.m_final_approx / target - 1), abs(f.m_final_special / target - 1))
    return CheckResult("resonant special-case floor", worst < 1e-13, f"max rel diff {worst:.1e}")


def check_u_y() -> CheckResult:
    worst_u = 0.0
    for r in (0.001, 0.005, 0.01, 0.02):
        for m in (0.0, 1.0, 5.0, 20.0):
            u = u_system_stationary(ModelParams(mu=r), m)
            worst_u = max(worst_u, abs(u.u_232), abs(u.u_tilde_223))
    y_plus, ym, y23 = 0.8, 0.3, -0.1
    q0 = ym ** 2 + 4 * y23 ** 2
    yp = y_plus
    for _ in range(10_000):
        ym, y23 = y_system_step(ym, y23, 1.0, 0.01)
    drift = abs(ym ** 2 + 4 * y23 ** 2 - q0)
    ok = worst_u < 1e-10 and drift < 1e-9 and yp == y_plus
    return CheckResult("u/y subsystems", ok, f"max |u| {worst_u:.1e}, quadratic invariant drift {drift:.1e}")


def check_protocol() -> CheckResult:
    p = ModelParams(mu=0.01, nu=1.0, c_floor=0.0)
    tr = run_protocol(10.0, p, max_cycles=2000, stop_tol=1e-12)
    ms = tr.m_series()
    k = np.arange(len(ms))
    env = continuous_envelope(10.0, p, k)
    rel = np.max(np.abs(ms[10:] / env[10:] - 1))
    mono = bool(np.all(np.diff(ms) < 0))
    return CheckResult("protocol continuous envelope", rel < 0.05 and mono, f"max rel dev after cycle 10 {rel:.2e}")


def check_oracle() -> CheckResult:
    from .crosscheck import oracle_crosscheck

    r = oracle_crosscheck()
    return CheckResult("master-equation oracle vs -A_N zeta", r.passes(1.3), f"ratio {r.ratio:.3f}")


FAST_CHECKS = (check_adiabatic, check_resonance, check_steady_state, check_displacement,
               check_cooling_conservation, check_scaling, check_special_floor, check_u_y, check_protocol)


def run_checks(include_oracle: bool = False, seed: int = 0) -> list[CheckResult]:
    checks = [partial(check_adiabatic, seed=seed)] + list(FAST_CHECKS[1:])
    if include_oracle:
        checks.append(check_oracle)
    return [c() for c in checks]
