import numpy as np
import pytest
from hypothesis import given, strategies as st

from fermibath.channel_maps import (DynamicalMatrix, choi_1q_from_superoperator, dynamical_matrices_2q,
                                    dynamical_matrix_1q, dynamical_matrix_2q, eigh_hermitian,
                                    eigvals_hermitian, intermediate_ratio, map_1q, min_eigenvalue_1q,
                                    reshuffle)
from fermibath.echo_engine import overlap_two_qubit
from fermibath.errors import NonHermitian, SingularIntermediate, ValidationError
from fermibath.exact_oracle import oracle_superoperator_1q, oracle_superoperator_2q
from fermibath.ising_env import TwoQubitParams, build_two_qubit_spectra
from fermibath.csvio import matrix_rows

unit_disc = st.tuples(st.floats(0, 1), st.floats(0, 2 * np.pi)).map(lambda p: p[0] * np.exp(1j * p[1]))
complex_y = st.tuples(st.floats(0, 5), st.floats(0, 2 * np.pi)).map(lambda p: p[0] * np.exp(1j * p[1]))


def random_state(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def test_map_identity(rng):
    rho = random_state(rng)
    assert np.allclose(map_1q(1.0).apply(rho), rho)


def test_map_full_dephasing(rng):
    rho = random_state(rng)
    out = map_1q(0.0).apply(rho)
    assert np.allclose(out, np.diag(np.diag(rho)))


def test_map_scales_coherence(rng):
    rho = random_state(rng)
    x = 0.3 + 0.4j
    out = map_1q(x).apply(rho)
    expected = np.array([[rho[0, 0], x.conjugate() * rho[0, 1]], [x * rho[1, 0], rho[1, 1]]])
    assert np.allclose(out, expected, atol=1e-15)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.allclose(out, out.conj().T)


def test_map_rejects_large_x():
    with pytest.raises(ValidationError):
        map_1q(1.01)


@given(unit_disc)
def test_map_trace_preserving(x):
    rho = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]])
    assert abs(np.trace(map_1q(x).apply(rho)) - 1) < 1e-12


def test_intermediate_ratio():
    assert intermediate_ratio(0.3 + 0.1j, 0.3 + 0.1j) == 1
    assert intermediate_ratio(0.8, 0.5) == pytest.approx(1.6)
    with pytest.raises(SingularIntermediate):
        intermediate_ratio(0.5, 1e-15, 1e-12)


@pytest.mark.parametrize("y,expected", [(1.0, [0, 0, 0, 2]), (0.0, [0, 0, 1, 1]), (0.5, [0, 0, 0.5, 1.5])])
def test_dynamical_matrix_1q_spectrum(y, expected):
    assert np.allclose(dynamical_matrix_1q(y).eigenvalues, expected, atol=1e-14)


def test_dynamical_matrix_1q_layout():
    d = dynamical_matrix_1q(0.2 + 0.3j).entries
    assert d[0, 0] == d[3, 3] == 1
    assert d[3, 0] == 0.2 + 0.3j and d[0, 3] == 0.2 - 0.3j
    assert np.count_nonzero(d) == 4


def test_min_eigenvalue_1q_examples():
    assert min_eigenvalue_1q(0.7j) == 0
    assert min_eigenvalue_1q(2.0) == -1
    assert dynamical_matrix_1q(1.6).min_eigenvalue == pytest.approx(-0.6)


def test_min_eigenvalue_1q_vs_dense(rng):
    ys = rng.uniform(0, 3, 1000) * np.exp(2j * np.pi * rng.uniform(size=1000))
    for y in ys:
        assert abs(min_eigenvalue_1q(y) - min(0.0, eigvals_hermitian(dynamical_matrix_1q(y))[0])) < 1e-12


@given(complex_y)
def test_1q_closed_form_spectrum(y):
    w = dynamical_matrix_1q(y).eigenvalues
    assert np.allclose(w, sorted([0, 0, 1 - abs(y), 1 + abs(y)]), atol=1e-12)


def test_choi_1q_of_map_is_dynamical_matrix():
    x = 0.4 - 0.2j
    assert np.allclose(choi_1q_from_superoperator(map_1q(x).matrix), dynamical_matrix_1q(x).entries)
    assert np.allclose(reshuffle(map_1q(x).matrix, 2), dynamical_matrix_1q(x).entries)


def test_1q_kraus_oracle_matches_map():
    from fermibath.echo_engine import decoherence_factor
    from fermibath.ising_env import IsingParams, build_spectrum
    x = decoherence_factor(build_spectrum(IsingParams(6, 0.5, 0.3)), 2.0)
    assert np.allclose(oracle_superoperator_1q(6, 0.5, 0.3, 2.0), map_1q(x).matrix, atol=1e-12)


def test_2q_identity_compatible():
    D = dynamical_matrix_2q(1, 1, 1, 3.0, 1.0, 2.0, 0.0)
    assert D.min_eigenvalue == pytest.approx(0, abs=1e-14)
    assert D.hermiticity_residual() == 0


@given(complex_y, complex_y, complex_y, st.floats(-5, 5), st.floats(0, 3), st.floats(0, 50))
def test_2q_hermitian_and_phase_invariant(y01, y02, y12, js, ls, dt):
    pp, pm, p0 = 2 * js * (1 + ls), 2 * js * (1 - ls), 4 * js * ls
    D = dynamical_matrix_2q(y01, y02, y12, pp, pm, p0, dt)
    assert D.hermiticity_residual() < 1e-12
    ref = dynamical_matrix_2q(y01, y02, y12, 3.0, 1.0, 2.0, 0.7).eigenvalues
    assert np.allclose(D.eigenvalues, ref, atol=1e-10)
    assert abs(D.eigenvalues.sum() - np.trace(D.entries).real) < 1e-10


def test_2q_two_system_parameter_sets():
    ys = (0.3 + 0.9j, -1.2 + 0.1j, 0.5 - 0.5j)
    a = dynamical_matrix_2q(*ys, *TwoQubitParams(4, 0.5, 0.1, 0.1, 1.0, 0.5).phases, 2.3).eigenvalues
    b = dynamical_matrix_2q(*ys, *TwoQubitParams(4, 0.5, 0.1, 0.1, 2.0, 1.3).phases, 2.3).eigenvalues
    assert np.allclose(a, b, atol=1e-10)


def test_2q_batched_equals_single(rng):
    y = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    dt = rng.uniform(0, 10, 5)
    batch = dynamical_matrices_2q(*y, 3.0, 1.0, 2.0, dt)
    for i in range(5):
        assert np.allclose(batch[i], dynamical_matrix_2q(*y[:, i], 3.0, 1.0, 2.0, dt[i]).entries, atol=1e-14, rtol=0)


@pytest.mark.parametrize("tm,tf", [(0.0, 1.7), (3.1, 7.7), (5.0, 12.5)])
def test_2q_spectrum_matches_kraus_oracle(tm, tf):
    # D from Phi(tf, 0) Phi(tm, 0)^+ built out of explicit Kraus operators
    p = TwoQubitParams(6, 0.5, 0.3, 0.15, j_s=1.3, lambda_s=0.4)
    sp = build_two_qubit_spectra(p)
    phi_f = oracle_superoperator_2q(6, 0.5, 0.3, 0.15, 1.3, 0.4, tf)
    phi_m = oracle_superoperator_2q(6, 0.5, 0.3, 0.15, 1.3, 0.4, tm)
    d_oracle = reshuffle(phi_f @ np.linalg.pinv(phi_m), 4)
    ys = [overlap_two_qubit(a, b, sp, tf) / overlap_two_qubit(a, b, sp, tm) for a, b in ((0, 1), (0, 2), (1, 2))]
    D = dynamical_matrix_2q(*ys, *p.phases, tf - tm)
    assert np.allclose(D.eigenvalues, np.linalg.eigvalsh(d_oracle), atol=1e-10)


def test_2q_full_map_is_cp():
    p = TwoQubitParams(6, 0.5, 0.3, 0.15)
    sp = build_two_qubit_spectra(p)
    for t in np.linspace(0, 30, 25):
        xs = [overlap_two_qubit(a, b, sp, t) for a, b in ((0, 1), (0, 2), (1, 2))]
        assert dynamical_matrix_2q(*xs, *p.phases, t).min_eigenvalue >= -1e-10


def test_eigvals_diagonal():
    assert np.array_equal(eigvals_hermitian(np.diag([3.0, -1.0, 2.0])), [-1.0, 2.0, 3.0])


@pytest.mark.parametrize("n", [2, 4, 16, 33])
def test_jacobi_against_numpy(rng, n):
    for _ in range(10):
        a = random_hermitian(rng, n)
        w, V = eigh_hermitian(a)
        assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-11)
        assert np.linalg.norm(a - V @ np.diag(w) @ V.conj().T) <= 1e-10
        assert np.allclose(V.conj().T @ V, np.eye(n), atol=1e-12)


def test_jacobi_batch(rng):
    a = np.stack([random_hermitian(rng, 16) for _ in range(20)])
    assert np.allclose(eigvals_hermitian(a), np.linalg.eigvalsh(a), atol=1e-11)


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitian):
        eigvals_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NonHermitian):
        eigvals_hermitian(np.ones((2, 3)))


def test_eigenvalue_cache():
    D = DynamicalMatrix(np.diag([2.0, 1.0]).astype(complex))
    assert D.eigenvalues is D.eigenvalues


def test_choi_csv_rows():
    rows = list(matrix_rows(dynamical_matrix_1q(0.5j).entries))
    assert len(rows) == 16
    assert rows[12] == (3, 0, 0.0, 0.5)
