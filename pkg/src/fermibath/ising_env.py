"""Transverse-field Ising ring as a paired-mode environment.

    H_ising = -J sum_j (sx_j sx_{j+1} + lam sz_j),     periodic (L + 1 = 1)

The qubit couples through the field: H_e = H_ising - delta * sum_j sz_j,
i.e. the perturbed chain is the same model at lam_eff = lam + delta.  After
Jordan-Wigner, the even-parity sector is a free-fermion problem on the
anti-periodic grid k = 2 pi q / L, q half-integer.

With Pauli matrices the single-particle energy is
``2 J sqrt(1 + lam_eff**2 - 2 lam_eff cos k)``; the factor 2 is what makes
-1/2 * sum_k eps_k equal the dense even-sector ground energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .paired_modes import ModeSpectrum


def _check_size(L):
    if isinstance(L, bool) or int(L) != L or L < 2 or L % 2:
        raise ValidationError(f"lattice_size must be an even integer >= 2, got {L!r}")


@dataclass(frozen=True)
class IsingParams:
    lattice_size: int
    lam: float
    delta: float
    coupling_J: float = 1.0

    def __post_init__(self):
        _check_size(self.lattice_size)
        for name in ("lam", "delta", "coupling_J"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")
        if self.coupling_J == 0:
            raise ValidationError("coupling_J must be > 0")


@dataclass(frozen=True)
class TwoQubitParams:
    lattice_size: int
    lam: float
    delta1: float
    delta2: float
    j_s: float = 1.0
    lambda_s: float = 0.5
    coupling_J: float = 1.0

    def __post_init__(self):
        _check_size(self.lattice_size)
        for name in ("lam", "delta1", "delta2", "coupling_J"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")
        for name in ("j_s", "lambda_s"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")

    @property
    def deltas(self) -> tuple[float, float, float]:
        return (0.0, self.delta1, self.delta2)

    @property
    def phases(self) -> tuple[float, float, float]:
        """(phi_plus, phi_minus, phi_0) = (2 J_S (1 + lam_S), 2 J_S (1 - lam_S), 4 J_S lam_S)."""
        return (2 * self.j_s * (1 + self.lambda_s),
                2 * self.j_s * (1 - self.lambda_s),
                4 * self.j_s * self.lambda_s)


def momentum_grid(L: int) -> np.ndarray:
    """Positive anti-periodic momenta (2 pi / L) * (1/2, 3/2, ..., (L - 1)/2)."""
    _check_size(L)
    return 2 * np.pi / L * (np.arange(L // 2) + 0.5)


def bogoliubov_angle(k, lambda_eff):
    """atan2(-sin k, cos k - lambda_eff).

    The two-argument form fixes the branch of the single-argument arctan;
    observables depend only on angle differences through cos/sin, so the
    branch choice is immaterial.
    """
    return np.arctan2(-np.sin(k), np.cos(k) - lambda_eff)


def dispersion(k, lambda_eff, J=1.0):
    """Single-particle energy 2 J sqrt(1 + lambda_eff**2 - 2 lambda_eff cos k)."""
    arg = 1.0 + lambda_eff * lambda_eff - 2.0 * lambda_eff * np.cos(k)
    return 2.0 * J * np.sqrt(np.maximum(arg, 0.0))


def _spectrum(L, lam_g, lam_e, J, label=""):
    k = momentum_grid(L)
    return ModeSpectrum.from_modes(
        k,
        bogoliubov_angle(k, lam_g),
        bogoliubov_angle(k, lam_e),
        dispersion(k, lam_g, J),
        dispersion(k, lam_e, J),
        lattice_size=L,
        label=label,
    )


def build_spectrum(params: IsingParams) -> ModeSpectrum:
    """Mode table for H_g = H_ising(lam) and H_e = H_ising(lam + delta)."""
    p = params
    return _spectrum(p.lattice_size, p.lam, p.lam + p.delta, p.coupling_J,
                     label=f"L={p.lattice_size},lambda={p.lam!r},delta={p.delta!r}")


def build_two_qubit_spectra(params: TwoQubitParams) -> tuple[ModeSpectrum, ModeSpectrum, ModeSpectrum]:
    """Spectra of H_a = H_0 - delta_a V for a = 0, 1, 2 (delta_0 = 0).

    Each entry is expressed relative to H_0: its ``theta_g``/``eps_g`` columns
    belong to H_0 and its ``theta_e``/``eps_e`` columns to H_a.  Spectrum 1 is
    therefore exactly the one-qubit spectrum with delta = delta1.
    """
    p = params
    return tuple(
        _spectrum(p.lattice_size, p.lam, p.lam + d, p.coupling_J, label=f"a={a}")
        for a, d in enumerate(p.deltas)
    )


def pair_alpha(spectra, a: int, b: int) -> np.ndarray:
    """alpha_{a,b}^k = (theta_a^k - theta_b^k) / 2."""
    return (spectra[a].theta_e - spectra[b].theta_e) / 2
