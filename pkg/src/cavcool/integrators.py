"""Fixed-step integrators shared by the oracle, the rate model and the displacement stage."""
from __future__ import annotations

import numpy as np


def rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def n_steps(t_final: float, dt: float) -> tuple[int, float]:
    """Number of steps covering ``t_final`` and the step actually used (<= dt)."""
    if t_final <= 0:
        return 0, dt
    n = int(np.ceil(t_final / dt - 1e-9))
    return n, t_final / n


def rk4_solve(f, y0, t_final, dt, stride=1):
    """Integrate dy/dt = f(y); returns (times, samples) every ``stride`` steps plus the endpoint."""
    n, h = n_steps(t_final, dt)
    y = np.array(y0, dtype=float if np.isrealobj(y0) else complex)
    ts, ys = [0.0], [y.copy()]
    for k in range(1, n + 1):
        y = rk4_step(f, y, h)
        if k % stride == 0 or k == n:
            ts.append(k * h)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)


# 4th-order Yoshida composition of the kick-drift-kick leapfrog
_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)
YOSHIDA_WEIGHTS = (_W1, _W0, _W1)


def leapfrog_step(x, p, force, dt):
    p = p + 0.5 * dt * force(x)
    x = x + dt * p
    p = p + 0.5 * dt * force(x)
    return x, p


def yoshida_step(x, p, force, dt):
    for w in YOSHIDA_WEIGHTS:
        x, p = leapfrog_step(x, p, force, w * dt)
    return x, p
