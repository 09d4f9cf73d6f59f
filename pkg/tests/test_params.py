import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavcool.errors import ParameterError
from cavcool.integrators import leapfrog_step, n_steps, rk4_solve, yoshida_step
from cavcool.params import ModelParams


def test_defaults_are_valid():
    p = ModelParams()
    assert p.N == 100 and p.mu <= 0.05 * p.nu
    assert p.gamma(2) == p.kappa + 2 * p.Gamma
    assert p.fastest_rate(2) == max(p.nu, p.delta, p.kappa, p.Gamma, p.Omega, 2 * p.eta * p.g)


@pytest.mark.parametrize("changes", [
    dict(N=0), dict(N=2.5), dict(kappa=-1.0), dict(eta=1.0), dict(eta=-0.1), dict(Omega=float("nan")),
    dict(mu=0.3), dict(mu=1.5), dict(g=True),
])
def test_invalid_parameters(changes):
    with pytest.raises(ParameterError):
        ModelParams(**changes)


def test_anharmonicity_messages():
    with pytest.raises(ParameterError, match="slight-anharmonicity"):
        ModelParams(mu=1.5, nu=1.0)
    with pytest.warns(RuntimeWarning, match="degrade"):
        ModelParams(mu=0.1)


def test_replace_revalidates():
    with pytest.raises(ParameterError):
        ModelParams().replace(mu=0.5)
    assert ModelParams().replace(N=7).N == 7


def test_integer_like_N_is_normalised():
    assert isinstance(ModelParams(N=10.0).N, int)


def test_n_steps():
    assert n_steps(1.0, 0.3) == (4, 0.25)
    assert n_steps(0.0, 0.1)[0] == 0
    n, h = n_steps(1.0, 0.1)
    assert n == 10 and h == pytest.approx(0.1)


def test_rk4_exponential():
    ts, ys = rk4_solve(lambda y: -0.7 * y, np.array([2.0]), 5.0, 0.01, stride=50)
    np.testing.assert_allclose(ys[:, 0], 2 * np.exp(-0.7 * ts), rtol=1e-10)
    assert ts[-1] == pytest.approx(5.0)


def test_rk4_fourth_order():
    errs = []
    for dt in (0.1, 0.05):
        ts, ys = rk4_solve(lambda y: np.array([y[1], -y[0]]), np.array([1.0, 0.0]), 10.0, dt)
        errs.append(abs(ys[-1, 0] - np.cos(10.0)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_yoshida_is_fourth_order_and_reversible(x0, p0):
    def force(x):
        return -x

    def run(dt, n):
        x, p = x0, p0
        for _ in range(n):
            x, p = yoshida_step(x, p, force, dt)
        return x, p

    amp = np.hypot(x0, p0)
    if amp < 1e-3:
        return
    e1 = abs(run(0.2, 10)[0] - (x0 * np.cos(2.0) + p0 * np.sin(2.0)))
    e2 = abs(run(0.1, 20)[0] - (x0 * np.cos(2.0) + p0 * np.sin(2.0)))
    assert e2 <= e1 / 10 + 1e-14
    x, p = run(0.1, 20)
    for _ in range(20):
        x, p = yoshida_step(x, p, force, -0.1)
    assert (x, p) == pytest.approx((x0, p0), abs=1e-12)


def test_leapfrog_conserves_harmonic_energy_bounded():
    x, p = 1.0, 0.0
    for _ in range(10000):
        x, p = leapfrog_step(x, p, lambda q: -q, 0.05)
    assert abs(0.5 * (x * x + p * p) - 0.5) < 1e-3
