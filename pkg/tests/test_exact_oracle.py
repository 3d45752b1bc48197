import numpy as np
import pytest

from fermibath.echo_engine import decoherence_factor
from fermibath.errors import ParityAmbiguity, SizeLimit
from fermibath.exact_oracle import (_evolved_states, _ground, build_ising_dense, even_sector, magnetization_diagonal,
                                    oracle_decoherence_factor, oracle_ground_energy,
                                    oracle_two_qubit_overlaps, parity_diagonal, system_energies_2q)
from fermibath.ising_env import IsingParams, build_spectrum


def test_two_site_ring():
    h = build_ising_dense(2, 0.0).entries
    assert np.allclose(np.linalg.eigvalsh(h), [-2, -2, 2, 2])


def test_field_dominated_limit():
    L, lam = 6, 1e3
    h = build_ising_dense(L, lam).entries
    w, v = np.linalg.eigh(h)
    assert abs(v[0, 0]) > 0.999  # all spins up is index 0
    assert w[0] == pytest.approx(-lam * L, rel=1e-5)


@pytest.mark.parametrize("L", [2, 5, 8])
def test_dense_hermitian_and_parity(L):
    h = build_ising_dense(L, 0.7).entries
    assert np.max(np.abs(h - h.conj().T)) <= 1e-14
    P = np.diag(parity_diagonal(L))
    assert np.max(np.abs(h @ P - P @ h)) <= 1e-12


def test_size_cap():
    with pytest.raises(SizeLimit):
        build_ising_dense(13, 0.5)
    with pytest.raises(SizeLimit):
        oracle_two_qubit_overlaps(12, 0.5, 0.1, 0.1, 1.0)


def test_magnetization_and_sector():
    assert list(magnetization_diagonal(2)) == [2, 0, 0, -2]
    assert list(even_sector(3)) == [0, 3, 5, 6]


@pytest.mark.parametrize("L", [4, 6, 8])
def test_ground_energy_matches_modes(L):
    for lam in (0.3, 1.0, 1.7):
        assert abs(oracle_ground_energy(L, lam) - build_spectrum(IsingParams(L, lam, 0.0)).ground_energy_g) < 1e-10


def test_trivial_values():
    assert oracle_decoherence_factor(6, 0.5, 0.3, 0.0) == pytest.approx(1, abs=1e-14)
    t = np.linspace(0, 10, 20)
    assert np.allclose(oracle_decoherence_factor(6, 0.5, 0.0, t), 1, atol=1e-12)
    for x in oracle_two_qubit_overlaps(6, 0.5, 0.0, 0.0, t):
        assert np.allclose(x, 1, atol=1e-12)
    for x in oracle_two_qubit_overlaps(6, 0.5, 0.3, 0.1, 0.0):
        assert x == pytest.approx(1, abs=1e-14)


def test_evolution_is_unitary():
    t = np.linspace(0, 50, 30)
    for psi in _evolved_states(8, 0.6, (0.0, 0.4), t, 1.0, 12):
        assert np.allclose(np.linalg.norm(psi, axis=0), 1, atol=1e-12)


def test_one_qubit_L8_200_times():
    t = np.linspace(0, 20, 200)
    x = decoherence_factor(build_spectrum(IsingParams(8, 0.5, 0.25)), t)
    assert np.max(np.abs(x - oracle_decoherence_factor(8, 0.5, 0.25, t))) < 1e-10


def test_two_qubit_L6():
    from fermibath.echo_engine import overlap_two_qubit
    from fermibath.ising_env import TwoQubitParams, build_two_qubit_spectra
    sp = build_two_qubit_spectra(TwoQubitParams(6, 0.5, 0.3, 0.15))
    t = np.linspace(0, 20, 100)
    for (a, b), ox in zip(((0, 1), (0, 2), (1, 2)), oracle_two_qubit_overlaps(6, 0.5, 0.3, 0.15, t)):
        assert np.max(np.abs(overlap_two_qubit(a, b, sp, t) - ox)) < 1e-8


def test_parity_ambiguity_surfaces():
    with pytest.raises(ParityAmbiguity):
        _ground(np.diag([-1.0, -1.0, 2.0]))
    assert _ground(np.diag([-1.0, 0.0]))[0] == -1.0


def test_system_energies():
    assert list(system_energies_2q(1.0, 0.5)) == [-2.0, 1.0, 1.0, 0.0]
