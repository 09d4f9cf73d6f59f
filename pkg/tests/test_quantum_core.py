import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavcool.errors import DimensionOverflowError, InvalidDimensionError, LayoutMismatchError, ValidationError
from cavcool.quantum_core import (
    Operator,
    QuantumState,
    annihilation_truncated,
    build_space,
    coherent_vector,
    commutator,
    displaced_thermal_dm,
    embed,
    expectation,
    fock_dm,
    identity,
    ladder_operators,
    product_state,
    real_expectation,
    thermal_dm,
    truncation_report,
)


@pytest.mark.parametrize("args, dim", [((1, 2, 2), 8), ((2, 3, 2), 72), ((3, 2, 2), 128)])
def test_total_dim(args, dim):
    assert build_space(*args).total_dim == dim


def test_layout_ordering():
    lay = build_space(2, 3, 4)
    assert lay.dims == (2, 2, 3, 3, 4)
    assert (lay.atom(1), lay.phonon(0), lay.cavity) == (1, 2, 4)
    with pytest.raises(IndexError):
        lay.phonon(2)


def test_dimension_cap():
    with pytest.raises(DimensionOverflowError, match="exceeds cap"):
        build_space(4, 6, 4)
    with pytest.raises(InvalidDimensionError):
        build_space(0, 3, 3)
    with pytest.raises(InvalidDimensionError):
        build_space(1, 1, 3)


def test_annihilation_examples():
    np.testing.assert_array_equal(annihilation_truncated(2).matrix, [[0, 1], [0, 0]])
    a3 = annihilation_truncated(3).matrix
    assert a3[0, 1] == 1 and a3[1, 2] == pytest.approx(np.sqrt(2))
    assert np.count_nonzero(a3) == 2
    with pytest.raises(InvalidDimensionError):
        annihilation_truncated(1)


def test_truncated_commutator_edge():
    a = annihilation_truncated(4)
    comm = commutator(a, a.dag).matrix
    np.testing.assert_allclose(np.diag(comm), [1, 1, 1, -3])
    assert np.count_nonzero(comm - np.diag(np.diag(comm))) == 0


def test_embed_identity_and_traces():
    lay = build_space(2, 3, 2)
    np.testing.assert_array_equal(embed(np.eye(3), lay.phonon(1), lay).matrix, identity(lay).matrix)
    sm = ladder_operators(lay).sm[0]
    assert np.trace((sm.dag @ sm).matrix).real == pytest.approx(lay.total_dim / 2)
    b = ladder_operators(lay).b
    assert np.max(np.abs(commutator(b[0], b[1].dag).matrix)) == 0


def test_embed_shape_mismatch():
    lay = build_space(1, 3, 2)
    with pytest.raises(LayoutMismatchError):
        embed(np.eye(2), lay.phonon(0), lay)


def test_operator_is_immutable():
    op = annihilation_truncated(3)
    with pytest.raises(ValueError):
        op.matrix[0, 1] = 5


def test_expectation_examples():
    lay = build_space(1, 12, 2)
    b = ladder_operators(lay).b[0]
    n = b.dag @ b
    g = fock_dm(0, 2)
    vac = product_state(lay, [g], [fock_dm(0, 12)], fock_dm(0, 2))
    two = product_state(lay, [g], [fock_dm(2, 12)], fock_dm(0, 2))
    th = product_state(lay, [g], [thermal_dm(0.5, 12)], fock_dm(0, 2))
    assert real_expectation(vac, n) == 0
    assert real_expectation(two, n) == pytest.approx(2)
    assert abs(real_expectation(th, n) - 0.5) < 1e-3


def test_expectation_layout_mismatch():
    a, b = build_space(1, 3, 2), build_space(1, 4, 2)
    st_ = product_state(a, [fock_dm(0, 2)], [fock_dm(0, 3)], fock_dm(0, 2))
    with pytest.raises(LayoutMismatchError):
        expectation(st_, identity(b))


def test_state_validation():
    lay = build_space(1, 2, 2)
    rho = np.eye(8) / 8
    QuantumState(rho, lay).validate()
    with pytest.raises(ValidationError):
        QuantumState(2 * rho, lay).validate()
    bad = rho.copy()
    bad[0, 0], bad[1, 1] = -0.1, bad[1, 1] + 0.1 + 0.125
    with pytest.raises(ValidationError):
        QuantumState(bad / np.trace(bad), lay).validate()


def test_truncation_warning():
    lay = build_space(1, 3, 2)
    st_ = product_state(lay, [fock_dm(0, 2)], [thermal_dm(2.0, 3)], fock_dm(0, 2))
    with pytest.warns(RuntimeWarning, match="increase the cutoff"):
        rep = truncation_report(st_)
    assert not rep.ok and rep.phonon_edge[0] > 0.2


@given(st.floats(0.0, 3.0), st.integers(4, 20))
def test_thermal_state_is_normalised(nbar, dim):
    rho = thermal_dm(nbar, dim)
    assert np.trace(rho).real == pytest.approx(1.0)
    p = np.diag(rho).real
    assert np.all(np.diff(p) <= 1e-15)


@given(st.floats(-1.0, 1.0), st.floats(0.0, 0.5))
def test_displaced_thermal_mean_field(alpha, nbar):
    dim = 30
    rho = displaced_thermal_dm(nbar, alpha, dim)
    a = annihilation_truncated(dim).matrix
    assert np.trace(rho @ a) == pytest.approx(alpha, abs=1e-8)
    assert np.trace(rho @ a.T @ a).real == pytest.approx(nbar + alpha ** 2, abs=1e-6)


def test_coherent_vector_matches_displacement():
    v = coherent_vector(0.5, 20)
    np.testing.assert_allclose(np.outer(v, v.conj()), displaced_thermal_dm(0.0, 0.5, 20), atol=1e-12)


@given(st.integers(0, 2 ** 31 - 1))
def test_hermitian_expectation_is_real(seed):
    r = np.random.default_rng(seed)
    lay = build_space(1, 3, 2)
    d = lay.total_dim
    m = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    h = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
    op = Operator(h + h.conj().T, lay)
    assert op.is_hermitian()
    assert abs(expectation(QuantumState(rho, lay), op).imag) < 1e-12
