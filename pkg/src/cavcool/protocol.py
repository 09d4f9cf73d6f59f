"""Alternating displacement / cooling cycles, the cooling floor and its N-scaling."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .displacement import coherence_after_displacement
from .errors import HotStartError, NoFloorError, ParameterError
from .params import ModelParams
from .rate_model import collective_rate, cooling_ode

DEFAULT_STAGE_FACTOR = 5.0
STRONG_INEQUALITY = 0.1


def seeding_strength(params: ModelParams) -> float:
    """(4 mu / nu)^2: zeta seeded per m^2 by one displacement stage."""
    return (4 * params.mu / params.nu) ** 2


def cycle_map(m: float, params: ModelParams) -> float:
    """m after one displacement + full cooling stage: m - (4 mu/nu)^2 m^2."""
    if m < 0:
        raise ParameterError(f"m must be >= 0, got {m}")
    r = seeding_strength(params)
    if r * m >= 1:
        raise HotStartError(
            f"(4 mu/nu)^2 m = {r * m:.3g} >= 1: the leading-order cycle overshoots; pre-cool the gas first")
    return m - r * m * m


@dataclass(frozen=True)
class CycleRecord:
    cycle: int
    stage: str  # "displacement" or "cooling"
    m_before: float
    m_after: float
    zeta_seeded: float
    A_N: float
    time: float


@dataclass
class ProtocolTrace:
    records: list = field(default_factory=list)
    converged: bool = False
    m_final_observed: float = float("nan")
    stop_reason: str = ""

    def m_series(self) -> np.ndarray:
        """m after each completed cycle, starting with the initial value."""
        ms = [r.m_after for r in self.records if r.stage == "cooling"]
        first = self.records[0].m_before if self.records else self.m_final_observed
        return np.array([first] + ms)

    @staticmethod
    def columns() -> list[str]:
        return ["cycle", "stage", "m_before", "m_after", "zeta_seeded", "A_N", "time"]


@dataclass(frozen=True)
class FloorEstimate:
    m_final_closed: float
    m_final_approx: float
    m_final_special: float | None
    c_floor: float


def implied_c_floor(params: ModelParams) -> float:
    """c for which (nu/4mu) sqrt(c/A_N) equals kappa/(16 mu sqrt(N)), at delta = nu."""
    A = collective_rate(params).A_N
    return A * params.kappa ** 2 / (16 * params.nu ** 2 * params.N)


def floor_estimate(params: ModelParams, implied_c: bool = False, special: bool = True) -> FloorEstimate:
    """Stationary m of dm/dt = -A_N (4mu/nu)^2 m^2 - gamma_c m + c.

    ``special=False`` skips the resonant strong-damping form (and its regime warning).
    """
    p = params
    A = collective_rate(p).A_N
    c = implied_c_floor(p) if implied_c else p.c_floor
    if c <= 0 or A <= 0:
        raise NoFloorError(f"no positive floor: c = {c:.3g}, A_N = {A:.3g} (need both > 0)")
    a = A * seeding_strength(p)
    if a == 0:
        raise NoFloorError("mu = 0: the displacement stage seeds no coherence")
    closed = 2 * c / (p.gamma_c + np.sqrt(p.gamma_c ** 2 + 4 * a * c))
    approx = (p.nu / (4 * p.mu)) * np.sqrt(c / A)
    m_special = None
    if special and np.isclose(p.delta, p.nu, rtol=1e-12, atol=0.0):
        if max(p.Omega, p.nu) > STRONG_INEQUALITY * min(p.kappa, p.Gamma):
            warnings.warn("resonant floor formula assumes Omega, nu << kappa, Gamma", RuntimeWarning, stacklevel=2)
        m_special = p.kappa / (16 * p.mu * np.sqrt(p.N))
    return FloorEstimate(float(closed), float(approx), m_special, c)


def run_protocol(m0: float, params: ModelParams, max_cycles: int = 1000, stop_tol: float = 1e-12,
                 mode: str = "closed", stage_duration: float | None = None) -> ProtocolTrace:
    """Iterate displacement + cooling until the per-cycle gain drops below ``stop_tol``
    or m reaches the cooling floor.

    mode "closed" applies the t >> 1/A_N stage outcome; mode "coupled" runs
    each cooling stage for ``stage_duration`` (default 5/A_N) with the
    closed-form cooling solution.
    """
    if max_cycles < 1:
        raise ParameterError("max_cycles must be >= 1")
    if mode not in ("closed", "coupled"):
        raise ParameterError(f"mode must be 'closed' or 'coupled', got {mode!r}")
    A = collective_rate(params).A_N
    if mode == "coupled":
        if A <= 0:
            raise ParameterError("coupled mode needs A_N > 0")
        stage_duration = DEFAULT_STAGE_FACTOR / A if stage_duration is None else stage_duration
    floor = None
    if params.c_floor > 0 and A > 0 and params.mu > 0:
        floor = floor_estimate(params, special=False).m_final_closed
    r = seeding_strength(params)

    trace = ProtocolTrace()
    m, t = float(m0), 0.0
    for k in range(max_cycles + 1):
        gain = r * m * m
        if gain < stop_tol:
            trace.converged, trace.stop_reason = True, "gain below stop_tol"
            break
        if floor is not None and m <= floor:
            trace.converged, trace.stop_reason = True, "cooling floor reached"
            break
        if k == max_cycles:
            trace.stop_reason = "max_cycles"
            break
        if r * m >= 1:
            raise HotStartError(
                f"(4 mu/nu)^2 m = {r * m:.3g} >= 1 at cycle {k}: pre-cool the gas first")
        zeta = coherence_after_displacement(m, params)
        trace.records.append(CycleRecord(k, "displacement", m, m, zeta, A, t))
        if mode == "closed":
            m_new = cycle_map(m, params)
        else:
            m_new, _ = cooling_ode(m, zeta, A, stage_duration)
            t += stage_duration
        trace.records.append(CycleRecord(k, "cooling", m, m_new, zeta, A, t))
        m = m_new
    trace.m_final_observed = m
    return trace


def continuous_envelope(m0: float, params: ModelParams, k) -> np.ndarray:
    """Solution of dm/dk = -(4mu/nu)^2 m^2, the continuum limit of the cycle map."""
    return 1.0 / (1.0 / m0 + seeding_strength(params) * np.asarray(k, dtype=float))


@dataclass
class ScalingStudy:
    N: np.ndarray
    A_N: np.ndarray
    m_final_closed: np.ndarray
    m_final_approx: np.ndarray
    slope_closed: float
    slope_approx: float
    slope_A: float

    def rows(self):
        for i in range(len(self.N)):
            yield {"N": int(self.N[i]), "A_N": self.A_N[i], "m_final_closed": self.m_final_closed[i],
                   "m_final_approx": self.m_final_approx[i], "slope_closed": self.slope_closed,
                   "slope_approx": self.slope_approx}

    @staticmethod
    def columns():
        return ["N", "A_N", "m_final_closed", "m_final_approx", "slope_closed", "slope_approx"]


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def scaling_study(params_base: ModelParams, N_list) -> ScalingStudy:
    N = np.asarray(sorted(N_list), dtype=float)
    if len(N) < 4 or N[-1] / N[0] < 100:
        raise ParameterError("scaling study needs >= 4 values of N spanning >= 2 decades")
    A, closed, approx = [], [], []
    for n in N:
        f = floor_estimate(params_base.replace(N=int(n)), special=False)
        A.append(collective_rate(params_base.replace(N=int(n))).A_N)
        closed.append(f.m_final_closed)
        approx.append(f.m_final_approx)
    A, closed, approx = map(np.array, (A, closed, approx))
    return ScalingStudy(N, A, closed, approx, loglog_slope(N, closed), loglog_slope(N, approx), loglog_slope(N, A))
