"""Non-Markovian dephasing of qubits coupled to a transverse-field Ising ring.

The environment is a quadratic fermionic (paired-mode) Hamiltonian, so every
decoherence factor is a product over momenta.  Submodules:

paired_modes        mode tables and ground energies
ising_env           Ising ring -> mode tables for one and two qubits
echo_engine         decoherence factors, Loschmidt echoes, time grids
channel_maps        superoperators, dynamical matrices, Hermitian eigensolver
nonmarkov_measures  eta, revival statistics, negativity and the witness N
exact_oracle        dense 2^L reference implementation for small rings
scaling_harness     size and field sweeps, scaling fits, chaos onset
cli                 ``fermibath`` command line
"""
from .echo_engine import (DecoherenceTrace, TimeGrid, TwoQubitTrace, decoherence_factor, loschmidt_echo,
                          overlap_two_qubit, trace_over_grid)
from .errors import FermibathError, NumericalError, ValidationError
from .ising_env import IsingParams, TwoQubitParams, build_spectrum, build_two_qubit_spectra
from .nonmarkov_measures import NonMarkovReport, eta, eta_two_qubit, revival_stats
from .paired_modes import ModeSpectrum

__version__ = "0.1.0"

__all__ = [
    "DecoherenceTrace", "TimeGrid", "TwoQubitTrace", "decoherence_factor", "loschmidt_echo",
    "overlap_two_qubit", "trace_over_grid", "FermibathError", "NumericalError", "ValidationError",
    "IsingParams", "TwoQubitParams", "build_spectrum", "build_two_qubit_spectra", "NonMarkovReport",
    "eta", "eta_two_qubit", "revival_stats", "ModeSpectrum",
]
