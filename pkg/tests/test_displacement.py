import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavcool import displacement as disp
from cavcool.errors import EscapeOrbitError, ParameterError
from cavcool.params import ModelParams

# max over mu/nu in {0.005, 0.01, 0.02}, bound m0 in {1, 5, 10} of |midpoint/first_order - 1| / (mu/nu)
MIDPOINT_C = 30.0


def eps(m0, p):
    """Anharmonic expansion parameter k A / nu^2 with A the harmonic amplitude."""
    return disp.cubic_coefficient(p) * np.sqrt(2 * m0 / p.nu) / p.nu ** 2


def test_turning_point_examples():
    p0 = ModelParams(mu=0.0, nu=1.0)
    assert disp.turning_points(1.0, p0) == pytest.approx((-np.sqrt(2.0), np.sqrt(2.0)))
    assert disp.turning_points(0.0, ModelParams()) == (0.0, 0.0)
    with pytest.raises(ParameterError):
        disp.turning_points(-1.0, p0)


@given(st.floats(0.001, 0.02), st.floats(0.1, 10.0), st.floats(0.5, 2.0))
def test_turning_points_are_roots(ratio, m0, nu):
    p = ModelParams(mu=ratio * nu, nu=nu)
    try:
        lo, hi = disp.turning_points(m0, p)
    except EscapeOrbitError:
        assert p.nu * m0 >= disp.barrier(p)[1]
        return
    E = p.nu * m0
    assert disp.potential(lo, p) == pytest.approx(E, rel=1e-12)
    assert disp.potential(hi, p) == pytest.approx(E, rel=1e-12)
    assert disp.barrier(p)[0] < lo < 0 < hi


def test_escape_above_barrier():
    p = ModelParams(mu=0.02)
    xb, vb = disp.barrier(p)
    assert vb == pytest.approx(p.nu ** 6 / (54 * disp.cubic_coefficient(p) ** 2))
    with pytest.raises(EscapeOrbitError, match="barrier"):
        disp.turning_points(10.0, p)
    with pytest.raises(EscapeOrbitError):
        disp.orbit_from_phonons(10.0, p, 1.0)


def test_turning_points_match_trajectory():
    p = ModelParams(mu=0.01, nu=1.0)
    lo, hi = disp.turning_points(10.0, p)
    maxima, minima = disp.orbit_from_phonons(10.0, p, 5.0).extrema()
    assert np.max(np.abs(maxima / hi - 1)) < 1e-6
    assert np.max(np.abs(minima / lo - 1)) < 1e-6


def test_mean_position_examples():
    p0 = ModelParams(mu=0.0)
    assert disp.mean_position(3.0, p0) == 0 and disp.mean_position(3.0, p0, "first_order") == 0
    p = ModelParams(mu=0.01, nu=1.0)
    assert disp.mean_position(10.0, p, "first_order") == pytest.approx(-0.4 * np.sqrt(2), rel=1e-15)
    assert disp.mean_position(10.0, p) < 0
    with pytest.raises(ValueError):
        disp.mean_position(1.0, p, "bogus")


@pytest.mark.parametrize("ratio", [0.005, 0.01, 0.02])
@pytest.mark.parametrize("m0", [1.0, 5.0, 10.0])
def test_midpoint_vs_first_order_bound(ratio, m0):
    p = ModelParams(mu=ratio)
    if p.nu * m0 >= disp.barrier(p)[1]:
        pytest.skip("above the cubic barrier")
    mid = disp.mean_position(m0, p)
    first = disp.mean_position(m0, p, "first_order")
    assert abs(mid / first - 1) <= MIDPOINT_C * ratio


@given(st.floats(1e-4, 2e-3), st.floats(0.5, 10.0))
def test_midpoint_series(ratio, m0):
    """midpoint = first_order * (1 + 8 eps^2 + O(eps^4))."""
    p = ModelParams(mu=ratio)
    e = eps(m0, p)
    mid = disp.mean_position(m0, p)
    first = disp.mean_position(m0, p, "first_order")
    assert mid / first - 1 == pytest.approx(8 * e ** 2, rel=200 * e ** 2 + 1e-6)


def test_coherence_examples():
    p = ModelParams(mu=0.01, nu=1.0)
    assert disp.coherence_after_displacement(0.0, p) == 0
    assert disp.coherence_after_displacement(5.0, ModelParams(mu=0.0)) == 0
    assert disp.coherence_after_displacement(10.0, p) == pytest.approx(0.16, rel=1e-15)


@given(st.floats(0.0, 0.02), st.floats(0.0, 10.0), st.floats(0.5, 2.0))
def test_coherence_equals_squared_position(ratio, m0, nu):
    p = ModelParams(mu=ratio * nu, nu=nu)
    x1 = disp.mean_position(m0, p, "first_order")
    assert disp.coherence_after_displacement(m0, p) == pytest.approx(0.5 * nu * x1 ** 2, rel=1e-14, abs=1e-300)


def test_harmonic_trajectory_closed_form():
    p = ModelParams(mu=0.0, nu=1.3)
    tr = disp.classical_trajectory(0.4, -0.7, p, 20.0, dt=0.005)
    exact = 0.4 * np.cos(p.nu * tr.t) + (-0.7 / p.nu) * np.sin(p.nu * tr.t)
    assert np.max(np.abs(tr.x - exact)) < 1e-6


@pytest.mark.parametrize("ratio, m0", [(0.005, 10.0), (0.01, 5.0), (0.02, 5.0)])
def test_energy_conservation(ratio, m0):
    tr = disp.orbit_from_phonons(m0, ModelParams(mu=ratio), periods=100.0)
    assert tr.energy_drift < 1e-8


@pytest.mark.parametrize("m0", [1.0, 5.0, 10.0])
def test_time_average_obeys_virial(m0):
    """Zero mean force over a period: nu^2 <x> = -3 k <x^2>."""
    p = ModelParams(mu=0.01)
    tr = disp.orbit_from_phonons(m0, p, periods=20.0, dt=2 * np.pi / 4000)
    ks = [k for k in range(1, len(tr.x) - 1) if tr.x[k] >= tr.x[k - 1] and tr.x[k] > tr.x[k + 1]]
    a, b = ks[0], ks[-1]
    x2 = np.trapezoid(tr.x[a:b + 1] ** 2, tr.t[a:b + 1]) / (tr.t[b] - tr.t[a])
    virial = -3 * disp.cubic_coefficient(p) * x2 / p.nu ** 2
    assert tr.time_average_x() == pytest.approx(virial, rel=2e-3)


def test_time_average_is_three_halves_of_midpoint():
    p = ModelParams(mu=0.002)
    for m0 in (1.0, 5.0):
        tr = disp.orbit_from_phonons(m0, p, periods=20.0)
        ratio = tr.time_average_x() / disp.mean_position(m0, p)
        assert ratio == pytest.approx(1.5, abs=5 * eps(m0, p) + 2e-3)


def test_phase_average_converges_to_time_average():
    p = ModelParams(mu=0.01)
    tr = disp.orbit_from_phonons(5.0, p, periods=20.0)
    ens = disp.phase_averaged_position(5.0, p, n_samples=20000, seed=1)
    assert ens == pytest.approx(tr.time_average_x(), rel=0.03)


def test_run_displacement():
    p = ModelParams(mu=0.01)
    res = disp.run_displacement(5.0, p)
    assert res.zeta_end == pytest.approx(disp.coherence_after_displacement(5.0, p))
    assert res.x_min < res.x_mean < 0 < res.x_max
    full = disp.run_displacement(5.0, p, integrate=True, periods=10.0)
    assert full.m_end == pytest.approx(5.0, rel=1e-8)
    assert full.period > 2 * np.pi  # anharmonic softening lengthens the period
