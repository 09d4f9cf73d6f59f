"""Effective rate equations for the collective cooling stage.

The fast single-particle expectation values x_abc = <B_a Sigma_b C_c>
(a, c in {2, 3}, b in {0..3}) obey a closed linear system driven by the
two-particle phonon coherence.  Eliminating them adiabatically leaves the
slow pair (m, zeta) with

    dm/dt = dzeta/dt = -A_N zeta.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDriveError, NumericalError, ParameterError, SingularSystemError
from .integrators import rk4_solve, rk4_step, n_steps
from .params import ModelParams

X_INDICES = tuple((a, b, c) for a in (2, 3) for b in range(4) for c in (2, 3))
X_POS = {k: i for i, k in enumerate(X_INDICES)}
U_NAMES = ("u_222", "u_232", "ut_222", "ut_223", "ut_232", "ut_233", "ut_332", "ut_333")
M_CLAMP = -1e-9


def xi(a: int, b: int, c: int) -> int:
    """Position of x_abc in the 16-vector."""
    return X_POS[(a, b, c)]


# atomic Bloch system ------------------------------------------------------------

def atomic_steady_state(Omega: float, Gamma: float) -> tuple[float, float, float]:
    """(s1, s2, s3) with s1 = <sigma+ sigma->, s2 = <Sigma_2>, s3 = <Sigma_3> in steady state."""
    if Omega < 0 or Gamma < 0:
        raise ParameterError("Omega and Gamma must be >= 0")
    if Omega == 0 and Gamma == 0:
        raise DegenerateDriveError("Gamma = Omega = 0: the atomic stationary state is not unique")
    den = Gamma ** 2 + 2 * Omega ** 2
    return Omega ** 2 / den, 0.0, 2 * Gamma * Omega / den


def bloch_rhs(s, Omega, Gamma):
    s1, s2, s3 = s
    return np.array([
        0.5 * Omega * s3 - Gamma * s1,
        -0.5 * Gamma * s2,
        Omega * (1 - 2 * s1) - 0.5 * Gamma * s3,
    ])


def bloch_relax(Omega, Gamma, s0=(0.0, 0.0, 0.0), t_final=None, dt=None):
    """Integrate the Bloch equations from ``s0``; returns the final (s1, s2, s3)."""
    if Gamma <= 0:
        raise DegenerateDriveError("relaxation needs Gamma > 0")
    t_final = 60.0 / Gamma if t_final is None else t_final
    dt = 0.02 / max(Gamma, Omega) if dt is None else dt
    n, h = n_steps(t_final, dt)
    s = np.array(s0, dtype=float)
    for _ in range(n):
        s = rk4_step(lambda y: bloch_rhs(y, Omega, Gamma), s, h)
    return tuple(float(v) for v in s)


# collective rate -----------------------------------------------------------------

@dataclass(frozen=True)
class CoolingRate:
    A_N: float
    numerator: float
    cavity_denominator: float
    atomic_denominator: float

    def __float__(self):
        return self.A_N


def collective_rate(params: ModelParams) -> CoolingRate:
    p = params
    if p.kappa <= 0:
        raise ZeroDivisionError("collective rate needs kappa > 0")
    num = p.N * (8 * p.eta * p.g * p.Omega * p.Gamma) ** 2 * p.nu * p.kappa * p.delta
    cav = p.kappa ** 4 + 16 * (p.delta ** 2 - p.nu ** 2) ** 2 + 8 * p.kappa ** 2 * (p.delta ** 2 + p.nu ** 2)
    atom = (p.Gamma ** 2 + 2 * p.Omega ** 2) ** 2
    if atom == 0:
        raise DegenerateDriveError("Gamma = Omega = 0")
    return CoolingRate(num / (cav * atom), num, cav, atom)


def resonant_rate(params: ModelParams) -> float:
    """A_N at delta = nu."""
    p = params
    return p.N * (8 * p.eta * p.g * p.Omega * p.Gamma * p.nu) ** 2 / (
        p.kappa * (p.kappa ** 2 + 16 * p.nu ** 2) * (p.Gamma ** 2 + 2 * p.Omega ** 2) ** 2)


# x-system --------------------------------------------------------------------------

def z_tilde_split(zeta, s, y_minus=0.0, y_23=0.0):
    """z~_abcd = y~_ab s_c s_d with y~_22 = (y+ + y-)/2, y~_33 = (y+ - y-)/2, y+ = 4 zeta."""
    y_plus = 4.0 * zeta
    y = {(2, 2): 0.5 * (y_plus + y_minus), (3, 3): 0.5 * (y_plus - y_minus), (2, 3): y_23, (3, 2): y_23}
    sv = (1.0,) + tuple(s)

    def z(a, b, c, d):
        return y[(a, b)] * sv[c] * sv[d]

    return z


def x_system_rhs(x, params: ModelParams, zeta: float, s=None, y_minus=0.0, y_23=0.0) -> np.ndarray:
    """Time derivative of the 16 x-variables, zeroth order in eta*g and mu."""
    p = params
    s = atomic_steady_state(p.Omega, p.Gamma) if s is None else s
    z = z_tilde_split(zeta, s, y_minus, y_23)
    nu, de, Om, G = p.nu, p.delta, p.Omega, p.N * p.eta * p.g
    g0, g1, g2 = p.kappa, p.kappa + p.Gamma, p.kappa + 2 * p.Gamma

    def X(a, b, c):
        return x[xi(a, b, c)]

    d = np.empty(16)
    # b = 0 block
    d[xi(2, 0, 2)] = -nu * X(3, 0, 2) - de * X(2, 0, 3) - G * z(2, 2, 0, 3) - 0.5 * g0 * X(2, 0, 2)
    d[xi(2, 0, 3)] = -nu * X(3, 0, 3) + de * X(2, 0, 2) + G * z(2, 2, 0, 2) - 0.5 * g0 * X(2, 0, 3)
    d[xi(3, 0, 2)] = nu * X(2, 0, 2) - de * X(3, 0, 3) - G * z(3, 2, 0, 3) - 0.5 * g0 * X(3, 0, 2)
    d[xi(3, 0, 3)] = nu * X(2, 0, 3) + de * X(3, 0, 2) + G * z(3, 2, 0, 2) - 0.5 * g0 * X(3, 0, 3)
    # b = 1 block
    d[xi(2, 1, 2)] = -nu * X(3, 1, 2) - de * X(2, 1, 3) + 0.5 * Om * X(2, 3, 2) - G * z(2, 2, 1, 3) - 0.5 * g2 * X(2, 1, 2)
    d[xi(2, 1, 3)] = -nu * X(3, 1, 3) + de * X(2, 1, 2) + 0.5 * Om * X(2, 3, 3) + G * z(2, 2, 1, 2) - 0.5 * g2 * X(2, 1, 3)
    d[xi(3, 1, 2)] = nu * X(2, 1, 2) - de * X(3, 1, 3) + 0.5 * Om * X(3, 3, 2) - G * z(3, 2, 1, 3) - 0.5 * g2 * X(3, 1, 2)
    d[xi(3, 1, 3)] = nu * X(2, 1, 3) + de * X(3, 1, 2) + 0.5 * Om * X(3, 3, 3) + G * z(3, 2, 1, 2) - 0.5 * g2 * X(3, 1, 3)
    # b = 2 block
    d[xi(2, 2, 2)] = -nu * X(3, 2, 2) - de * X(2, 2, 3) - G * z(2, 2, 2, 3) - 0.5 * g1 * X(2, 2, 2)
    d[xi(2, 2, 3)] = -nu * X(3, 2, 3) + de * X(2, 2, 2) + G * z(2, 2, 2, 2) - 0.5 * g1 * X(2, 2, 3)
    d[xi(3, 2, 2)] = nu * X(2, 2, 2) - de * X(3, 2, 3) - G * z(3, 2, 2, 3) - 0.5 * g1 * X(3, 2, 2)
    d[xi(3, 2, 3)] = nu * X(2, 2, 3) + de * X(3, 2, 2) + G * z(3, 2, 2, 2) - 0.5 * g1 * X(3, 2, 3)
    # b = 3 block
    d[xi(2, 3, 2)] = -nu * X(3, 3, 2) - de * X(2, 3, 3) + Om * (X(2, 0, 2) - 2 * X(2, 1, 2)) - G * z(2, 2, 3, 3) - 0.5 * g1 * X(2, 3, 2)
    d[xi(2, 3, 3)] = -nu * X(3, 3, 3) + de * X(2, 3, 2) + Om * (X(2, 0, 3) - 2 * X(2, 1, 3)) + G * z(2, 2, 3, 2) - 0.5 * g1 * X(2, 3, 3)
    d[xi(3, 3, 2)] = nu * X(2, 3, 2) - de * X(3, 3, 3) + Om * (X(3, 0, 2) - 2 * X(3, 1, 2)) - G * z(3, 2, 3, 3) - 0.5 * g1 * X(3, 3, 2)
    d[xi(3, 3, 3)] = nu * X(2, 3, 3) + de * X(3, 3, 2) + Om * (X(3, 0, 3) - 2 * X(3, 1, 3)) + G * z(3, 2, 3, 2) - 0.5 * g1 * X(3, 3, 3)
    return d


def x_system_matrix(params: ModelParams, s=None) -> tuple[np.ndarray, np.ndarray]:
    """(M, q) with dx/dt = M x + q * zeta, read off the right-hand side by linearity."""
    q = x_system_rhs(np.zeros(16), params, 1.0, s)
    M = np.column_stack([x_system_rhs(e, params, 0.0, s) for e in np.eye(16)])
    return M, q


def adiabatic_solve_x(params: ModelParams, zeta: float, s=None) -> np.ndarray:
    """Stationary x for fixed zeta: solves M x = -q zeta."""
    if zeta == 0:
        return np.zeros(16)
    M, q = x_system_matrix(params, s)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e13:
        raise SingularSystemError(
            f"x-system is singular (cond = {cond:.2e}); kappa = {params.kappa}, Gamma = {params.Gamma} must be > 0")
    return np.linalg.solve(M, -q * zeta)


def adiabatic_rate(params: ModelParams) -> float:
    """Collective rate implied by the numeric elimination: -(eta g / 2) x_333 / zeta."""
    x = adiabatic_solve_x(params, 1.0)
    return -0.5 * params.eta * params.g * x[xi(3, 3, 3)]


def slow_eigenvalue(params: ModelParams) -> complex:
    """Eigenvalue of the coupled (x, zeta) linear system closest to zero.

    Tends to -A_N when A_N is small against kappa and Gamma; the gap
    measures how well the adiabatic elimination holds.
    """
    M, q = x_system_matrix(params)
    half = 0.5 * params.eta * params.g
    J = np.zeros((17, 17))
    J[:16, :16] = M
    J[:16, 16] = q
    J[16, xi(3, 2, 2)] = J[16, xi(3, 3, 3)] = half
    ev = np.linalg.eigvals(J)
    return complex(ev[np.argmin(np.abs(ev))])


@dataclass
class AdiabaticReport:
    draws: int
    max_rel_error: float
    max_x322_ratio: float
    mean_ratio: float
    worst: dict = field(default_factory=dict)

    @property
    def systematic_factor(self) -> float | None:
        """Measured A_numeric / A_closed when the mismatch looks like a constant factor."""
        return self.mean_ratio if self.max_rel_error > 1e-6 else None


def random_regime_params(rng: np.random.Generator, **fixed) -> ModelParams:
    """Parameters with N*eta*g, nu, Omega, Gamma, kappa >> mu, eta*g (rates in units of nu)."""
    nu = 1.0
    draw = dict(
        N=int(rng.integers(10, 10_000)),
        eta=float(rng.uniform(1e-3, 0.05)),
        g=float(rng.uniform(0.2, 5.0)),
        Omega=float(rng.uniform(0.2, 5.0)),
        Gamma=float(rng.uniform(0.2, 5.0)),
        kappa=float(rng.uniform(0.2, 5.0)),
        delta=float(rng.uniform(0.1, 3.0)),
        nu=nu,
        mu=float(rng.uniform(0.0, 0.02)),
    )
    draw.update(fixed)
    return ModelParams(**draw)


def adiabatic_report(n_draws: int = 200, seed: int = 0) -> AdiabaticReport:
    """Numeric elimination vs. closed-form A_N over random in-regime draws."""
    rng = np.random.default_rng(seed)
    worst_err, worst_x322, ratios, worst = 0.0, 0.0, [], {}
    for _ in range(n_draws):
        p = random_regime_params(rng)
        zeta = float(rng.uniform(0.01, 1.0))
        x = adiabatic_solve_x(p, zeta)
        a_closed = collective_rate(p).A_N
        a_num = -0.5 * p.eta * p.g * x[xi(3, 3, 3)] / zeta
        err = abs(a_num / a_closed - 1)
        ratios.append(a_num / a_closed)
        worst_x322 = max(worst_x322, abs(x[xi(3, 2, 2)]) / abs(x[xi(3, 3, 3)]))
        if err >= worst_err:
            worst_err, worst = err, p.as_dict()
    return AdiabaticReport(n_draws, worst_err, worst_x322, float(np.mean(ratios)), worst)


# slow variables ----------------------------------------------------------------------

def cooling_ode(m0: float, zeta0: float, A_N: float, t):
    """Closed-form solution of dm/dt = dzeta/dt = -A_N zeta; ``t`` may be an array."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be >= 0")
    decay = np.exp(-A_N * t)
    zeta = zeta0 * decay
    m = m0 - zeta0 * (1 - decay)
    if np.ndim(t) == 0:
        return float(m), float(zeta)
    return m, zeta


@dataclass
class RateState:
    m: float
    zeta: float
    x: np.ndarray = field(default_factory=lambda: np.zeros(16))
    s: tuple = (0.0, 0.0, 0.0)
    y_plus: float | None = None
    y_minus: float = 0.0
    y_23: float = 0.0
    u: np.ndarray = field(default_factory=lambda: np.zeros(8))

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.x.shape != (16,) or self.u.shape != (8,):
            raise ParameterError("RateState needs 16 x-variables and 8 u-variables")
        if self.y_plus is None:
            self.y_plus = 4.0 * self.zeta
        if not np.isfinite(self.zeta):
            raise NumericalError(f"zeta is not finite: {self.zeta}")
        if self.m < M_CLAMP:
            warnings.warn(f"m = {self.m:.3e} < 0; clamped to 0", RuntimeWarning, stacklevel=2)
            self.m = 0.0

    @classmethod
    def from_bundle(cls, bundle) -> RateState:
        yt = bundle.y_tilde
        u = np.zeros(8)
        u[U_NAMES.index("u_232")] = bundle.u_232
        u[U_NAMES.index("ut_223")] = bundle.u_tilde_223
        return cls(
            m=bundle.m, zeta=bundle.zeta,
            x=np.array([bundle.x[k] for k in X_INDICES]), s=tuple(bundle.s),
            y_plus=yt[(2, 2)] + yt[(3, 3)], y_minus=yt[(2, 2)] - yt[(3, 3)], y_23=yt[(2, 3)], u=u,
        )

    @staticmethod
    def columns() -> list[str]:
        return (["m", "zeta"] + ["x_%d%d%d" % k for k in X_INDICES] + ["s_1", "s_2", "s_3"]
                + ["y_plus", "y_minus", "y_23"] + list(U_NAMES))

    def to_row(self) -> dict:
        vals = [self.m, self.zeta, *self.x, *self.s, self.y_plus, self.y_minus, self.y_23, *self.u]
        return dict(zip(self.columns(), (float(v) for v in vals)))


def integrate_rate_model(params: ModelParams, m0: float, zeta0: float, t_final: float, dt=None,
                         x0=None, stride=1, check_tilde=False):
    """Integrate the 16 x-variables together with (m, zeta) without eliminating x.

    dm/dt = dzeta/dt = (eta g / 2)(x_322 + x_333); the u-contribution vanishes
    in the stationary u-system and is dropped.  With ``check_tilde`` the
    two-particle copy x~ is integrated alongside and must stay identical.
    """
    p = params
    s = atomic_steady_state(p.Omega, p.Gamma)
    gam2 = p.kappa + 2 * p.Gamma
    if dt is None:
        dt = 0.05 / max(gam2, p.nu, abs(p.delta), p.Omega, p.N * p.eta * p.g)
    half = 0.5 * p.eta * p.g
    n_x = 32 if check_tilde else 16

    def f(y):
        d = np.empty_like(y)
        zeta = y[n_x + 1]
        d[:16] = x_system_rhs(y[:16], p, zeta, s)
        if check_tilde:
            d[16:32] = x_system_rhs(y[16:32], p, zeta, s)
        d[n_x] = half * (y[xi(3, 2, 2)] + y[xi(3, 3, 3)])
        xt = y[16:32] if check_tilde else y[:16]
        d[n_x + 1] = half * (xt[xi(3, 2, 2)] + xt[xi(3, 3, 3)])
        return d

    y0 = np.zeros(n_x + 2)
    if x0 is not None:
        y0[:16] = x0
        if check_tilde:
            y0[16:32] = x0
    y0[n_x], y0[n_x + 1] = m0, zeta0
    ts, ys = rk4_solve(f, y0, t_final, dt, stride)
    if check_tilde and not np.array_equal(ys[:, :16], ys[:, 16:32]):
        raise NumericalError("x~ diverged from x despite identical equations and data")
    states = [RateState(m=y[n_x], zeta=y[n_x + 1], x=y[:16], s=s) for y in ys]
    return ts, states


# y~ subsystem -------------------------------------------------------------------------

def y_system_rhs(y, nu):
    """d/dt (y+, y-, y~_23) at zeroth order in eta."""
    _, y_minus, y_23 = y
    return np.array([0.0, -4 * nu * y_23, nu * y_minus])


def y_system_step(y_minus: float, y_23: float, nu: float, t: float) -> tuple[float, float]:
    """Exact propagation: rotation of (y-, 2 y~_23) at frequency 2 nu; y+ is untouched."""
    c, s = np.cos(2 * nu * t), np.sin(2 * nu * t)
    return float(y_minus * c - 2 * y_23 * s), float(y_23 * c + 0.5 * y_minus * s)


# u subsystem ---------------------------------------------------------------------------

def u_tilde_rhs(ut, nu, mu, m):
    """d/dt of (u~_222, u~_223, u~_232, u~_233, u~_332, u~_333) to first order in mu."""
    a, b, c, d, e, f = ut
    src = 6 * mu * (2 * m + 1) ** 2
    return np.array([
        -nu * (b + 2 * c),
        nu * (a - 2 * d) + src,
        nu * (a - d - e),
        nu * (b + c - f),
        nu * (2 * c - f),
        nu * (2 * d + e) + src,
    ])


@dataclass(frozen=True)
class UStationary:
    u_232: float
    u_tilde: dict

    @property
    def u_tilde_223(self) -> float:
        return self.u_tilde["ut_223"]


def u_system_stationary(params: ModelParams, m: float) -> UStationary:
    """Adiabatic values of the u-variables.

    du_222/dt = -3 nu u_232 forces u_232 = 0.  The six u~ equations are
    solved as a linear system; u_222 is not fixed by stationarity and is
    not returned.
    """
    nu, mu = params.nu, params.mu
    if nu <= 0:
        raise ParameterError("u-system needs nu > 0")
    q = u_tilde_rhs(np.zeros(6), nu, mu, m)
    M = np.column_stack([u_tilde_rhs(e, nu, 0.0, m) for e in np.eye(6)])
    if abs(np.linalg.det(M / nu)) < 1e-12:
        raise SingularSystemError("u~ system is singular")
    sol = np.linalg.solve(M, -q)
    return UStationary(0.0, dict(zip(U_NAMES[2:], (float(v) for v in sol))))
