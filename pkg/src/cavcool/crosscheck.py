"""Brute-force master equation vs. the collective rate A_N."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .lindblad import DT_SAFETY, evolve_iter, initial_state
from .observables import mean_phonon, phonon_coherence
from .params import ModelParams
from .quantum_core import SpaceLayout, build_space, truncation_report
from .rate_model import collective_rate

# two atoms, weak drive, resolved sideband; every rate is in units of nu
ORACLE_PARAMS = ModelParams(N=2, Omega=0.3, g=2.0, eta=0.02, nu=1.0, mu=0.0, delta=1.0, kappa=0.3, Gamma=1.0)


@dataclass
class CrossCheckReport:
    A_N: float
    zeta0: float
    t_start: float
    t_end: float
    dm_oracle: float
    dm_predicted: float
    times: np.ndarray
    m: np.ndarray
    zeta: np.ndarray
    max_edge_population: float

    @property
    def ratio(self) -> float:
        """Coarse-grained oracle dm/dt divided by the rate-model value -A_N <zeta>."""
        return self.dm_oracle / self.dm_predicted

    def passes(self, factor: float = 1.3) -> bool:
        return np.sign(self.dm_oracle) == np.sign(self.dm_predicted) and 1 / factor <= self.ratio <= factor


def oracle_crosscheck(params: ModelParams = ORACLE_PARAMS, layout: SpaceLayout | None = None, alpha: float = 0.25,
                      m_thermal: float = 0.0, dt: float | None = None, sample_every: float = 1.0,
                      settle: float | None = None, max_efolds: float = 3.0) -> CrossCheckReport:
    """Seed zeta with a coherent displacement of every phonon mode and compare the
    oracle's phonon loss with -A_N * integral(zeta dt).

    The comparison window starts after ``settle`` (default 10/min(kappa, Gamma),
    the atomic/cavity transient) and ends when zeta has fallen by one e-fold.
    """
    layout = build_space(2, 4, 3) if layout is None else layout
    params = params.replace(N=layout.n_atoms)
    A = collective_rate(params).A_N
    dt = DT_SAFETY / params.fastest_rate(layout.n_atoms) if dt is None else dt
    settle = 10.0 / min(params.kappa, params.Gamma) if settle is None else settle
    t_max = settle + max_efolds / A
    stride = max(1, int(round(sample_every / dt)))
    rho0 = initial_state(layout, m_thermal, alpha)

    ts, ms, zs = [], [], []
    edge = 0.0
    z_start, i_start = None, None
    for t, st in evolve_iter(rho0, params, t_max, dt, stride=stride):
        ts.append(t)
        ms.append(mean_phonon(st))
        zs.append(phonon_coherence(st))
        edge = max(edge, truncation_report(st, warn=False).worst)
        if z_start is None and t >= settle:
            z_start, i_start = zs[-1], len(zs) - 1
        if z_start is not None and zs[-1] <= z_start / np.e:
            break
    else:
        raise NumericalError(f"zeta did not decay by one e-fold within t = {t_max:.4g}")
    ts, ms, zs = map(np.array, (ts, ms, zs))
    win = slice(i_start, len(ts))
    dm = ms[-1] - ms[i_start]
    pred = -A * np.trapezoid(zs[win], ts[win])
    return CrossCheckReport(A, zs[0], ts[i_start], ts[-1], dm, pred, ts, ms, zs, edge)
