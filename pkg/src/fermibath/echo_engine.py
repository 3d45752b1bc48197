"""Decoherence factors and Loschmidt echoes as products over k > 0 modes.

One qubit::

    x(t) = exp(-i (E_e - E_g) t) * prod_k [cos^2 a_k + sin^2 a_k exp(-2 i eps_e^k t)]

Two qubits, x_{a,b}(t) = <phi_b(t)|phi_a(t)> with the four-term per-mode
factor of :func:`overlap_two_qubit`.

Products are accumulated as sums of complex logarithms so that moduli far
below the double range (large lattices) do not underflow; ``log_abs`` is
kept alongside ``x`` for the same reason.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ValidationError
from .ising_env import pair_alpha
from .paired_modes import ModeSpectrum

_CHUNK = 1 << 21  # (times x modes) elements per vectorized block


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ValidationError("grid bounds must be finite")
        if self.t_start < 0:
            raise ValidationError(f"t_start must be >= 0, got {self.t_start}")
        if not self.t_end > self.t_start:
            raise ValidationError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValidationError(f"n_points must be an integer >= 2, got {self.n_points!r}")

    @property
    def spacing(self) -> float:
        return (self.t_end - self.t_start) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return self.t_start + np.arange(self.n_points) * self.spacing

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_start, self.t_end, factor * self.n_points)


def _fingerprint(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(np.ascontiguousarray(p).tobytes())
        else:
            h.update(repr(p).encode())
    return h.hexdigest()[:16]


def spectrum_fingerprint(spec: ModeSpectrum) -> str:
    return _fingerprint(spec.k, spec.theta_g, spec.theta_e, spec.eps_g, spec.eps_e)


@dataclass(frozen=True)
class DecoherenceTrace:
    """x(t) on a grid.  ``x`` may be None for modulus-only (large-L) traces."""

    grid: TimeGrid
    x: np.ndarray | None
    log_abs: np.ndarray
    params_fingerprint: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.log_abs.shape != (self.grid.n_points,):
            raise ValidationError("trace length does not match its grid")
        if np.any(self.log_abs > 1e-12):
            raise ValidationError("|x(t)| exceeds 1 beyond rounding slack")

    @property
    def times(self) -> np.ndarray:
        return self.grid.points()

    @property
    def abs_x(self) -> np.ndarray:
        if self.x is not None:
            return np.abs(self.x)
        return np.exp(self.log_abs)

    @property
    def echo(self) -> np.ndarray:
        return np.minimum(np.exp(2 * self.log_abs), 1.0)


@dataclass(frozen=True)
class TwoQubitTrace:
    grid: TimeGrid
    x01: np.ndarray
    x02: np.ndarray
    x12: np.ndarray
    params_fingerprint: str = ""

    @property
    def times(self) -> np.ndarray:
        return self.grid.points()

    def components(self):
        return self.x01, self.x02, self.x12


def _time_chunks(t: np.ndarray, n_modes: int):
    step = max(1, _CHUNK // max(n_modes, 1))
    for i in range(0, t.size, step):
        yield slice(i, i + step)


def _one_qubit_logsum(spec: ModeSpectrum, t: np.ndarray) -> np.ndarray:
    """Complex log of x(t); real part is log|x|."""
    s2 = np.sin(spec.alphas) ** 2
    eps = spec.eps_e
    out = np.empty(t.size, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for sl in _time_chunks(t, eps.size):
            ph = 2.0 * np.outer(t[sl], eps)
            # cos^2 a + sin^2 a e^{-i ph} == 1 - sin^2 a (1 - e^{-i ph}); exact 1 at t = 0
            one_minus = 2.0 * np.sin(ph / 2) ** 2 + 1j * np.sin(ph)
            out[sl] = np.log(1.0 - s2 * one_minus).sum(axis=1)
    return out - 1j * spec.energy_shift * t


def _exp_log(z: np.ndarray) -> np.ndarray:
    x = np.exp(z)
    x[np.isneginf(z.real)] = 0.0
    return x


def decoherence_factor(spec: ModeSpectrum, t):
    """x(t) = <phi_g(t)|phi_e(t)>; scalar in, scalar out."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    x = _exp_log(_one_qubit_logsum(spec, tt.ravel())).reshape(tt.shape)
    return complex(x[0]) if np.ndim(t) == 0 else x


def loschmidt_echo(spec: ModeSpectrum, t):
    """|x(t)|^2, clipped into [0, 1]."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    z = _one_qubit_logsum(spec, tt.ravel())
    le = np.minimum(np.exp(2 * z.real), 1.0).reshape(tt.shape)
    return float(le[0]) if np.ndim(t) == 0 else le


def _two_qubit_logsum(a, b, spectra, t):
    al0a = pair_alpha(spectra, 0, a)
    al0b = pair_alpha(spectra, 0, b)
    alab = pair_alpha(spectra, a, b)
    c0a, s0a = np.cos(al0a), np.sin(al0a)
    c0b, s0b = np.cos(al0b), np.sin(al0b)
    cab, sab = np.cos(alab), np.sin(alab)
    ea = 2.0 * spectra[a].eps_e  # eps^k + eps^{-k}
    eb = 2.0 * spectra[b].eps_e
    shift = spectra[a].ground_energy_e - spectra[b].ground_energy_e
    out = np.empty(t.size, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for sl in _time_chunks(t, ea.size):
            tt = t[sl, None]
            f = (c0a * c0b * cab
                 + (c0a * s0b * np.exp(1j * eb * tt) - c0b * s0a * np.exp(-1j * ea * tt)) * sab
                 + s0a * s0b * cab * np.exp(-1j * (ea - eb) * tt))
            out[sl] = np.log(f).sum(axis=1)
    return out - 1j * shift * t


def overlap_two_qubit(a: int, b: int, spectra, t):
    """x_{a,b}(t) = <phi_b(t)|phi_a(t)>, phi_a evolved by H_a from the ground state of H_0."""
    if a not in (0, 1, 2) or b not in (0, 1, 2):
        raise ValidationError(f"overlap indices must be in {{0, 1, 2}}, got ({a}, {b})")
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if a == b:
        x = np.ones(tt.shape, dtype=complex)
    else:
        x = _exp_log(_two_qubit_logsum(a, b, spectra, tt.ravel())).reshape(tt.shape)
    return complex(x[0]) if np.ndim(t) == 0 else x


@njit(cache=True)
def _log_abs_uniform(A, freq, t0, dt, n):
    """0.5 * sum_k log(1 - A_k sin^2(freq_k t_j)) on t_j = t0 + j dt.

    Per-mode phases advance by a rotation recurrence, re-seeded exactly at
    the start of every time block; four modes are interleaved to hide the
    recurrence latency, and factors are multiplied in groups of 16 before
    taking a single log.
    """
    block = 1024
    out = np.zeros(n)
    m = A.shape[0]
    m4 = (m + 3) // 4 * 4
    Ap = np.zeros(m4)
    Fp = np.zeros(m4)
    Ap[:m] = A
    Fp[:m] = freq
    P = np.empty(block)
    for jb in range(0, n, block):
        nb = min(block, n - jb)
        tb = t0 + jb * dt
        for g0 in range(0, m4, 16):
            for j in range(nb):
                P[j] = 1.0
            for k in range(g0, min(g0 + 16, m4), 4):
                a0 = Ap[k]
                a1 = Ap[k + 1]
                a2 = Ap[k + 2]
                a3 = Ap[k + 3]
                c0 = math.cos(Fp[k] * tb)
                s0 = math.sin(Fp[k] * tb)
                c1 = math.cos(Fp[k + 1] * tb)
                s1 = math.sin(Fp[k + 1] * tb)
                c2 = math.cos(Fp[k + 2] * tb)
                s2 = math.sin(Fp[k + 2] * tb)
                c3 = math.cos(Fp[k + 3] * tb)
                s3 = math.sin(Fp[k + 3] * tb)
                w0 = math.cos(Fp[k] * dt)
                v0 = math.sin(Fp[k] * dt)
                w1 = math.cos(Fp[k + 1] * dt)
                v1 = math.sin(Fp[k + 1] * dt)
                w2 = math.cos(Fp[k + 2] * dt)
                v2 = math.sin(Fp[k + 2] * dt)
                w3 = math.cos(Fp[k + 3] * dt)
                v3 = math.sin(Fp[k + 3] * dt)
                for j in range(nb):
                    P[j] *= ((1.0 - a0 * s0 * s0) * (1.0 - a1 * s1 * s1)
                             * (1.0 - a2 * s2 * s2) * (1.0 - a3 * s3 * s3))
                    c0, s0 = c0 * w0 - s0 * v0, s0 * w0 + c0 * v0
                    c1, s1 = c1 * w1 - s1 * v1, s1 * w1 + c1 * v1
                    c2, s2 = c2 * w2 - s2 * v2, s2 * w2 + c2 * v2
                    c3, s3 = c3 * w3 - s3 * v3, s3 * w3 + c3 * v3
            for j in range(nb):
                p = P[j]
                out[jb + j] += math.log(p) if p > 0.0 else -math.inf
    return 0.5 * out


def log_abs_over_grid(spec: ModeSpectrum, grid: TimeGrid) -> np.ndarray:
    """log|x(t)| on a uniform grid without forming the complex product."""
    A = np.sin(2 * spec.alphas) ** 2
    la = _log_abs_uniform(np.ascontiguousarray(A), np.ascontiguousarray(spec.eps_e),
                          float(grid.t_start), float(grid.spacing), int(grid.n_points))
    return np.minimum(la, 0.0)


def trace_over_grid(spec, grid: TimeGrid, *, phases: bool = True):
    """Evaluate the decoherence factor(s) on every grid point.

    ``spec`` is either one :class:`ModeSpectrum` (one qubit) or the triple
    from ``build_two_qubit_spectra``.  With ``phases=False`` a one-qubit trace
    carries only ``log_abs`` (fast path used by the large-L sweeps).
    """
    t = grid.points()
    if isinstance(spec, ModeSpectrum):
        fp = _fingerprint(spectrum_fingerprint(spec), grid)
        meta = {"lattice_size": spec.lattice_size}
        if not phases:
            return DecoherenceTrace(grid, None, log_abs_over_grid(spec, grid), fp, meta)
        z = _one_qubit_logsum(spec, t)
        return DecoherenceTrace(grid, _exp_log(z), np.minimum(z.real, 0.0), fp, meta)
    spectra = tuple(spec)
    if len(spectra) != 3:
        raise ValidationError("two-qubit traces need exactly three spectra")
    fp = _fingerprint(*(spectrum_fingerprint(s) for s in spectra), grid)
    return TwoQubitTrace(grid, *(overlap_two_qubit(a, b, spectra, t)
                                 for a, b in ((0, 1), (0, 2), (1, 2))), params_fingerprint=fp)
