"""Superoperators, intermediate maps and Choi (dynamical) matrices.

Conventions: vec(|x><y|) = |x> (x) |y>, so a Kraus map acts as
``sum_mu K_mu (x) conj(K_mu)`` on row-stacked density matrices.  Basis order
is (g, e) for one qubit and (gg, ge, eg, ee) for two; the dynamical matrix
index of the pair (m, n) is ``m * d + n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import NonHermitian, SingularIntermediate, ValidationError

G, E = 0, 1
GG, GE, EG, EE = 0, 1, 2, 3

DEFAULT_TOL_SING = 1e-12
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Superoperator1Q:
    x: complex
    matrix: np.ndarray

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return (self.matrix @ rho.reshape(4)).reshape(2, 2)


def map_1q(x: complex) -> Superoperator1Q:
    """Dephasing channel Phi(t, 0) = diag(1, x*, x, 1) in the vec basis (gg, ge, eg, ee)."""
    x = complex(x)
    if not (math.isfinite(x.real) and math.isfinite(x.imag)) or abs(x) > 1 + 1e-9:
        raise ValidationError(f"decoherence factor must satisfy |x| <= 1, got |x| = {abs(x)}")
    m = np.diag([1.0, x.conjugate(), x, 1.0]).astype(complex)
    return Superoperator1Q(x, m)


def intermediate_ratio(x_f: complex, x_m: complex, tol_sing: float = DEFAULT_TOL_SING) -> complex:
    """y(t_f, t_m) = x(t_f) / x(t_m); the pseudo-inverse at t_m must exist."""
    if abs(x_m) <= tol_sing:
        raise SingularIntermediate(x_m, tol_sing)
    return x_f / x_m


@dataclass(frozen=True)
class DynamicalMatrix:
    entries: np.ndarray
    _eig: list = field(default_factory=list, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        if not self._eig:
            self._eig.append(eigvals_hermitian(self))
        return self._eig[0]

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


def dynamical_matrix_1q(y: complex) -> DynamicalMatrix:
    """4x4 Choi matrix of the intermediate dephasing map."""
    y = complex(y)
    d = np.zeros((4, 4), dtype=complex)
    d[0, 0] = d[3, 3] = 1.0
    d[3, 0] = y
    d[0, 3] = y.conjugate()
    return DynamicalMatrix(d)


def min_eigenvalue_1q(y: complex) -> float:
    """Smallest eigenvalue of :func:`dynamical_matrix_1q`; spectrum is {0, 0, 1 - |y|, 1 + |y|}."""
    return min(0.0, 1.0 - abs(y))


def choi_1q_from_superoperator(phi: np.ndarray) -> np.ndarray:
    """Reshuffle a 4x4 superoperator into its dynamical matrix, D[mn, mu nu] = Phi[m mu, n nu]."""
    return np.asarray(phi).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def reshuffle(phi: np.ndarray, d: int) -> np.ndarray:
    """Same reshuffle for a d-level system (superoperator is d^2 x d^2)."""
    return np.asarray(phi).reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def _d2_fill(D, y01, y02, y12, pp, pm, p0, dt):
    # D += c |s s><s' s'| is D[5 s, 5 s'] += c for the 4-level basis
    def put(s, sp, v):
        D[..., 5 * s, 5 * sp] += v

    for s in range(4):
        put(s, s, 1.0)
    put(GE, EG, 1.0)
    put(EG, GE, 1.0)
    em = np.exp(1j * pm * dt)
    ep = np.exp(1j * pp * dt)
    e0 = np.exp(1j * p0 * dt)
    for s in (EG, GE):
        put(EE, s, np.conj(y02) * em)
        put(s, EE, y02 * np.conj(em))
        put(GG, s, np.conj(y12) * ep)
        put(s, GG, y12 * np.conj(ep))
    put(EE, GG, np.conj(y01) * np.conj(e0))
    put(GG, EE, y01 * e0)


def dynamical_matrix_2q(y01, y02, y12, phi_plus, phi_minus, phi_0, dt) -> DynamicalMatrix:
    """16x16 Choi matrix of the two-qubit intermediate map.

    Unit populations, the ge<->eg coherence, and six y-weighted coherence
    terms carrying the system phases exp(+-i phi dt).
    """
    D = np.zeros((16, 16), dtype=complex)
    _d2_fill(D, complex(y01), complex(y02), complex(y12), phi_plus, phi_minus, phi_0, dt)
    return DynamicalMatrix(D)


def dynamical_matrices_2q(y01, y02, y12, phi_plus, phi_minus, phi_0, dt) -> np.ndarray:
    """Batched :func:`dynamical_matrix_2q`; inputs broadcast to shape (n,), returns (n, 16, 16)."""
    y01, y02, y12, dt = np.broadcast_arrays(*(np.asarray(v) for v in (y01, y02, y12, dt)))
    n = y01.size
    D = np.zeros((n, 16, 16), dtype=complex)
    _d2_fill(D, y01.ravel(), y02.ravel(), y12.ravel(), phi_plus, phi_minus, phi_0, dt.ravel())
    return D


@njit(cache=True)
def _jacobi_hermitian(A, tol, max_sweeps):
    """Cyclic Jacobi for a complex Hermitian matrix; A is overwritten.

    Each rotation first removes the phase of A[p, q] and then applies the
    real symmetric rotation that annihilates it.
    """
    n = A.shape[0]
    V = np.eye(n, dtype=np.complex128)
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += abs(A[i, j]) ** 2
        if math.sqrt(2.0 * off) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                ph = apq / r
                app = A[p, p].real
                aqq = A[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # U = P J with P = diag(.., conj(ph) at q, ..): columns then rows
                for i in range(n):
                    aip = A[i, p]
                    aiq = A[i, q] * np.conj(ph)
                    A[i, p] = c * aip - s * aiq
                    A[i, q] = s * aip + c * aiq
                for i in range(n):
                    api = A[p, i]
                    aqi = A[q, i] * ph
                    A[p, i] = c * api - s * aqi
                    A[q, i] = s * api + c * aqi
                A[p, q] = 0.0
                A[q, p] = 0.0
                for i in range(n):
                    vip = V[i, p]
                    viq = V[i, q] * np.conj(ph)
                    V[i, p] = c * vip - s * viq
                    V[i, q] = s * vip + c * viq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i].real
    return w, V


@njit(cache=True)
def _jacobi_batch(D, tol, max_sweeps):
    out = np.empty((D.shape[0], D.shape[1]))
    for b in range(D.shape[0]):
        w, _ = _jacobi_hermitian(D[b].copy(), tol, max_sweeps)
        out[b] = np.sort(w)
    return out


def _as_array(D):
    return D.entries if isinstance(D, DynamicalMatrix) else np.asarray(D, dtype=complex)


def _check_hermitian(a, tol=HERMITIAN_TOL):
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise NonHermitian(f"expected square matrices, got shape {a.shape}")
    res = np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2)))) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if res > tol * scale:
        raise NonHermitian(f"Hermiticity residual {res:.3e} exceeds {tol:.0e}")


def _tol_for(a):
    return 1e-13 * max(1.0, float(np.sqrt(np.sum(np.abs(a) ** 2))))


def eigh_hermitian(D) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) by cyclic Jacobi rotations."""
    a = _as_array(D)
    _check_hermitian(a)
    w, V = _jacobi_hermitian(np.array(a, dtype=np.complex128), _tol_for(a), 100)
    order = np.argsort(w)
    return w[order], V[:, order]


def eigvals_hermitian(D) -> np.ndarray:
    """Ascending real spectrum of a Hermitian matrix (or a stack of them)."""
    a = _as_array(D)
    _check_hermitian(a)
    if a.ndim == 2:
        return eigh_hermitian(a)[0]
    flat = np.ascontiguousarray(a.reshape(-1, a.shape[-2], a.shape[-1]), dtype=np.complex128)
    tol = 1e-13 * max(1.0, float(np.max(np.sqrt(np.sum(np.abs(flat) ** 2, axis=(1, 2))))))
    return _jacobi_batch(flat, tol, 100).reshape(a.shape[:-1])
