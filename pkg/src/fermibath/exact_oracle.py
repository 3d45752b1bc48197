"""Brute-force reference: dense spin Hamiltonians on the full 2^L space.

Everything the product formulas predict for small rings is recomputed here
by exact diagonalization, without any fermionic machinery.  Basis states
are bit strings with site 0 as the most significant bit; bit 1 means
sz = -1.  The total parity prod_j sz_j is diagonal in this basis, so the
even sector is simply the set of states with an even number of set bits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParityAmbiguity, SizeLimit, ValidationError

MAX_SITES_ONE_QUBIT = 12
MAX_SITES_TWO_QUBIT = 10
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class DenseOperator:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _check(L, cap):
    if isinstance(L, bool) or int(L) != L or L < 2:
        raise ValidationError(f"L must be an integer >= 2, got {L!r}")
    if L > cap:
        raise SizeLimit(f"dense oracle limited to L <= {cap}, got {L}")


def _popcount(L):
    idx = np.arange(2 ** L)
    return np.array([bin(i).count("1") for i in idx])


def magnetization_diagonal(L) -> np.ndarray:
    """Diagonal of sum_j sz_j."""
    return L - 2.0 * _popcount(L)


def build_ising_dense(L: int, lam: float, J: float = 1.0, cap: int = MAX_SITES_ONE_QUBIT) -> DenseOperator:
    """H = -J sum_j (sx_j sx_{j+1} + lam sz_j) with the periodic bond sx_L sx_1."""
    _check(L, cap)
    dim = 2 ** L
    H = np.zeros((dim, dim))
    H[np.diag_indices(dim)] = -J * lam * magnetization_diagonal(L)
    idx = np.arange(dim)
    for j in range(L):
        mask = (1 << (L - 1 - j)) | (1 << (L - 1 - (j + 1) % L))
        np.add.at(H, (idx ^ mask, idx), -J)
    return DenseOperator(H)


def parity_diagonal(L) -> np.ndarray:
    """Diagonal of prod_j sz_j."""
    return 1.0 - 2.0 * (_popcount(L) % 2)


def even_sector(L) -> np.ndarray:
    return np.flatnonzero(_popcount(L) % 2 == 0)


def _even_block(L, lam, delta, J, cap):
    H = build_ising_dense(L, lam, J, cap).entries
    ev = even_sector(L)
    sz = magnetization_diagonal(L)[ev]
    return H[np.ix_(ev, ev)], sz


def _ground(h):
    w, v = np.linalg.eigh(h)
    if w.size > 1 and w[1] - w[0] < DEGENERACY_TOL:
        raise ParityAmbiguity(f"even-sector ground state degenerate (gap {w[1] - w[0]:.2e})")
    return w[0], v[:, 0]


def oracle_ground_energy(L: int, lam: float, J: float = 1.0) -> float:
    """Lowest eigenvalue of the dense Ising ring inside the even-parity sector."""
    h, _ = _even_block(L, lam, 0.0, J, MAX_SITES_ONE_QUBIT)
    return float(np.linalg.eigvalsh(h)[0])


def _evolve(h, psi0, t):
    """exp(-i h t) psi0 for every t; returns (dim, nt)."""
    w, v = np.linalg.eigh(h)
    c = v.T @ psi0
    return v @ (c[:, None] * np.exp(-1j * np.outer(w, t)))


def _evolved_states(L, lam, deltas, t, J, cap):
    h0, sz = _even_block(L, lam, 0.0, J, cap)
    _, g = _ground(h0)
    return [_evolve(h0 - d * np.diag(sz), g, t) for d in deltas]


def oracle_decoherence_factor(L: int, lam: float, delta: float, t, J: float = 1.0):
    """<phi_g(t)|phi_e(t)> by exact evolution of the even-sector ground state of H_g."""
    _check(L, MAX_SITES_ONE_QUBIT)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    pg, pe = _evolved_states(L, lam, (0.0, delta), tt.ravel(), J, MAX_SITES_ONE_QUBIT)
    x = np.einsum("it,it->t", pg.conj(), pe).reshape(tt.shape)
    return complex(x[0]) if np.ndim(t) == 0 else x


def oracle_two_qubit_overlaps(L: int, lam: float, delta1: float, delta2: float, t, J: float = 1.0):
    """(x_01, x_02, x_12) with x_ab = <phi_b(t)|phi_a(t)>, phi_a = exp(-i H_a t)|G_0>."""
    _check(L, MAX_SITES_TWO_QUBIT)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    phi = _evolved_states(L, lam, (0.0, delta1, delta2), tt.ravel(), J, MAX_SITES_TWO_QUBIT)

    def ov(a, b):
        x = np.einsum("it,it->t", phi[b].conj(), phi[a]).reshape(tt.shape)
        return complex(x[0]) if np.ndim(t) == 0 else x

    return ov(0, 1), ov(0, 2), ov(1, 2)


def _kraus_superoperator(env_amplitudes, sys_phases):
    """sum_i K_i (x) conj(K_i) for diagonal Kraus operators K_i = diag(amp[i, s] * phase[s])."""
    K = env_amplitudes * sys_phases[None, :]  # (n_env, d)
    d = K.shape[1]
    # K (x) K* maps |s>|r> to K_ss conj(K_rr) |s>|r>
    return np.diag(np.einsum("is,ir->sr", K, K.conj()).reshape(d * d))


def oracle_superoperator_1q(L: int, lam: float, delta: float, t: float, J: float = 1.0) -> np.ndarray:
    """Phi(t, 0) from explicit Kraus operators K_i = <i| e^{-iHt} |G_g>, env basis = even sector."""
    _check(L, MAX_SITES_ONE_QUBIT)
    pg, pe = _evolved_states(L, lam, (0.0, delta), np.array([float(t)]), J, MAX_SITES_ONE_QUBIT)
    amps = np.stack([pg[:, 0], pe[:, 0]], axis=1)  # columns: |g>, |e>
    return _kraus_superoperator(amps, np.ones(2))


def system_energies_2q(j_s: float, lambda_s: float) -> np.ndarray:
    """Diagonal of H_S = -J_S [sz1 sz2 + lam_S (sz1 + sz2)] in (gg, ge, eg, ee), sz|g> = +|g>."""
    z1 = np.array([1.0, 1.0, -1.0, -1.0])
    z2 = np.array([1.0, -1.0, 1.0, -1.0])
    return -j_s * (z1 * z2 + lambda_s * (z1 + z2))


def oracle_superoperator_2q(L, lam, delta1, delta2, j_s, lambda_s, t, J: float = 1.0) -> np.ndarray:
    """16x16 Phi(t, 0) of the two-qubit channel from explicit Kraus operators.

    gg couples to H_1, ge and eg to H_2, ee to H_0; the system Hamiltonian
    contributes the diagonal phases exp(-i E_S(s) t).
    """
    _check(L, MAX_SITES_TWO_QUBIT)
    phi = _evolved_states(L, lam, (0.0, delta1, delta2), np.array([float(t)]), J, MAX_SITES_TWO_QUBIT)
    env_of = (1, 2, 2, 0)
    amps = np.stack([phi[a][:, 0] for a in env_of], axis=1)
    phases = np.exp(-1j * system_energies_2q(j_s, lambda_s) * t)
    return _kraus_superoperator(amps, phases)
