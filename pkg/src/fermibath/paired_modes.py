"""Quadratic fermionic Hamiltonians in paired-mode (k, -k) Bogoliubov form.

A paired-mode environment is fully described, for our purposes, by one row
per positive momentum: the Bogoliubov angles of the unperturbed and the
perturbed Hamiltonian and their single-particle energies.  The partner mode
at -k is implicit (odd angle, even energy).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

CSV_HEADER = ("k", "theta_g", "theta_e", "eps_g", "eps_e")


@dataclass(frozen=True)
class ModeEntry:
    k: float
    theta_g: float
    theta_e: float
    eps_g: float
    eps_e: float


def alpha(entry: ModeEntry) -> float:
    """Half the difference of the two Bogoliubov angles, (theta_g - theta_e) / 2."""
    return (entry.theta_g - entry.theta_e) / 2


def ground_energy(energies: Iterable[float]) -> float:
    """Ground energy -1/2 * sum(eps) of H = sum_k eps_k (A_k^dag A_k - 1/2).

    ``energies`` must list every mode, both members of each (k, -k) pair.
    The sum is correctly rounded (``math.fsum``) so the result does not
    depend on the order of the input.
    """
    eps = [float(e) for e in energies]
    if not eps:
        raise ValidationError("ground_energy: empty spectrum")
    if any(not math.isfinite(e) or e < 0 for e in eps):
        raise ValidationError("ground_energy: energies must be finite and >= 0")
    return -0.5 * math.fsum(eps)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModeSpectrum:
    """Positive-momentum half of a paired-mode spectrum.

    Arrays are stored column-wise and are read-only.  Use :meth:`from_modes`
    rather than the raw constructor; it validates and fills the ground
    energies.
    """

    k: np.ndarray
    theta_g: np.ndarray
    theta_e: np.ndarray
    eps_g: np.ndarray
    eps_e: np.ndarray
    lattice_size: int
    ground_energy_g: float
    ground_energy_e: float
    label: str = field(default="", compare=False)

    @classmethod
    def from_modes(cls, k, theta_g, theta_e, eps_g, eps_e, lattice_size=None, label=""):
        cols = [_readonly(np.atleast_1d(c)) for c in (k, theta_g, theta_e, eps_g, eps_e)]
        n = cols[0].size
        if n == 0:
            raise ValidationError("spectrum needs at least one mode")
        if any(c.shape != (n,) for c in cols):
            raise ValidationError("spectrum columns must be 1-d and of equal length")
        if not all(np.all(np.isfinite(c)) for c in cols):
            raise ValidationError("spectrum contains NaN or Inf")
        k_, _, _, eg, ee = cols
        if np.any(k_ <= 0):
            raise ValidationError("only k > 0 modes are stored")
        if n > 1 and np.any(np.diff(k_) <= 0):
            raise ValidationError("momenta must be strictly ascending")
        if np.any(eg < 0) or np.any(ee < 0):
            raise ValidationError("single-particle energies must be >= 0")
        if lattice_size is None:
            lattice_size = 2 * n
        if lattice_size != 2 * n:
            raise ValidationError(f"lattice_size {lattice_size} needs {lattice_size // 2} modes, got {n}")
        return cls(
            *cols,
            lattice_size=int(lattice_size),
            ground_energy_g=ground_energy(np.concatenate([eg, eg])),
            ground_energy_e=ground_energy(np.concatenate([ee, ee])),
            label=label,
        )

    def __len__(self) -> int:
        return self.k.size

    @property
    def entries(self) -> list[ModeEntry]:
        return [ModeEntry(*map(float, row)) for row in
                zip(self.k, self.theta_g, self.theta_e, self.eps_g, self.eps_e)]

    @property
    def alphas(self) -> np.ndarray:
        return (self.theta_g - self.theta_e) / 2

    @property
    def energy_shift(self) -> float:
        """E_e - E_g, the rate of the global phase of the decoherence factor."""
        return self.ground_energy_e - self.ground_energy_g


def read_spectrum_csv(path: str | Path) -> ModeSpectrum:
    """Load a custom spectrum; '#' lines are treated as comments."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
    if not rows or tuple(h.strip() for h in rows[0]) != CSV_HEADER:
        raise ValidationError(f"{path}: expected header {','.join(CSV_HEADER)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(CSV_HEADER):
        raise ValidationError(f"{path}: every row needs {len(CSV_HEADER)} fields")
    return ModeSpectrum.from_modes(*data.T, label=path.stem)


def spectrum_rows(spec: ModeSpectrum) -> Sequence[tuple]:
    return list(zip(spec.k, spec.theta_g, spec.theta_e, spec.eps_g, spec.eps_e))
