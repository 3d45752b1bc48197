"""Non-Markovianity quantifiers built on a decoherence trace.

* eta: most negative eigenvalue of the intermediate dynamical matrix over
  all grid pairs t_m < t_f.  For one qubit that eigenvalue is
  min(0, 1 - |x(t_f)| / |x(t_m)|), so the pair search collapses to a
  suffix-maximum scan.
* revival statistics of the Loschmidt echo (decay minimum, first revival).
* negativity of qubit + ancilla started in |phi+>, and the witness N, the
  accumulated increase of that negativity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel_maps import (DEFAULT_TOL_SING, dynamical_matrices_2q, eigvals_hermitian,
                           map_1q)
from .echo_engine import DecoherenceTrace, TwoQubitTrace
from .errors import EmptyTrace, NoRevival, ValidationError

ZERO_EIG_TOL = 1e-12


@dataclass(frozen=True)
class NonMarkovReport:
    eta: float
    argmin_tm: float
    argmin_tf: float
    skipped_cells: int = 0
    log_ratio: float = 0.0  # log max |y| = log(1 - eta) when eta < 0
    l_dec: float | None = None
    l_rev: float | None = None
    tau: float | None = None
    witness_n: float | None = None
    eigenvalues: tuple | None = None

    @property
    def log_neg_eta(self) -> float:
        """ln(-eta), evaluated from ``log_ratio`` so it survives |y| beyond double range."""
        r = self.log_ratio
        if not r > 0:
            return -math.inf
        return r + math.log(-math.expm1(-r))

    @property
    def eta_from_revival(self) -> float | None:
        """1 - sqrt(l_rev / l_dec): eta when one decay and one revival dominate."""
        if self.l_dec is None or self.l_rev is None or not self.l_dec > 0:
            return None
        return 1.0 - math.sqrt(self.l_rev / self.l_dec)

    def as_row(self) -> dict:
        row = {k: getattr(self, k) for k in
               ("eta", "argmin_tm", "argmin_tf", "skipped_cells", "log_ratio",
                "l_dec", "l_rev", "tau", "witness_n")}
        row["eta_from_revival"] = self.eta_from_revival
        return row


@dataclass(frozen=True)
class RevivalStats:
    l_dec: float
    l_rev: float
    tau: float
    t_dec: float


def _require(trace):
    if trace is None or trace.grid.n_points < 2:
        raise EmptyTrace("need a trace with at least two grid points")


def eta(trace: DecoherenceTrace, tol_sing: float = DEFAULT_TOL_SING) -> NonMarkovReport:
    """One-qubit eta by an O(T) scan.

    For each t_m the worst t_f is the argmax of |x| over later grid points.
    Points with |x(t_m)| <= tol_sing are skipped and counted.  Traces
    without phases are scanned in log space.
    """
    _require(trace)
    t = trace.times
    if trace.x is not None:
        a = np.abs(trace.x)
        valid = a > tol_sing
    else:
        a = trace.log_abs
        valid = a > (math.log(tol_sing) if tol_sing > 0 else -math.inf)
    T = a.size
    # suf[m] = max of a over strictly later points
    suf = np.empty(T)
    suf[:-1] = np.maximum.accumulate(a[::-1])[::-1][1:]
    suf[-1] = -np.inf
    cand = np.flatnonzero(valid[:-1])
    skipped = int(T - 1 - cand.size)
    if cand.size == 0:
        return NonMarkovReport(0.0, float("nan"), float("nan"), skipped)
    if trace.x is not None:
        vals = 1.0 - suf[cand] / a[cand]
        m = int(cand[np.argmin(vals)])
        value = min(0.0, float(1.0 - suf[m] / a[m]))
    else:
        r = suf[cand] - a[cand]
        m = int(cand[np.argmax(r)])
        value = min(0.0, float(-math.expm1(suf[m] - a[m])))
    f = m + 1 + int(np.argmax(a[m + 1:]))
    log_ratio = float(trace.log_abs[f] - trace.log_abs[m])
    return NonMarkovReport(value, float(t[m]), float(t[f]), skipped, log_ratio)


def min_eigenvalue_grid(trace: DecoherenceTrace, tol_sing: float = DEFAULT_TOL_SING) -> np.ndarray:
    """Smallest intermediate-map eigenvalue for every (t_m, t_f) cell.

    Row index is t_m, column index t_f; cells with t_f <= t_m or a singular
    t_m are NaN.
    """
    _require(trace)
    a = trace.abs_x
    T = a.size
    out = np.full((T, T), np.nan)
    iu = np.triu_indices(T, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.minimum(0.0, 1.0 - a[iu[1]] / a[iu[0]])
    vals[a[iu[0]] <= tol_sing] = np.nan
    out[iu] = vals
    return out


def _pairs(T):
    m, f = np.triu_indices(T, 1)
    return m, f


def two_qubit_cell_spectra(trace: TwoQubitTrace, params, tm_idx, tf_idx) -> np.ndarray:
    """Full 16-point spectra of the intermediate dynamical matrices at the given cells."""
    t = trace.times
    tm_idx = np.asarray(tm_idx)
    tf_idx = np.asarray(tf_idx)
    ys = [x[tf_idx] / x[tm_idx] for x in trace.components()]
    pp, pm, p0 = params.phases
    D = dynamical_matrices_2q(*ys, pp, pm, p0, t[tf_idx] - t[tm_idx])
    return eigvals_hermitian(D)


def eta_two_qubit(trace: TwoQubitTrace, params, tol_sing: float = DEFAULT_TOL_SING,
                  chunk: int = 4096) -> NonMarkovReport:
    """eta for two qubits: min over grid pairs of the 16x16 dynamical-matrix spectrum."""
    _require(trace)
    t = trace.times
    ok = np.all([np.abs(x) > tol_sing for x in trace.components()], axis=0)
    m_all, f_all = _pairs(t.size)
    keep = ok[m_all]
    skipped = int(np.count_nonzero(~ok[:-1]))
    m_all, f_all = m_all[keep], f_all[keep]
    best, best_cell, best_spec = np.inf, (math.nan, math.nan), None
    for i in range(0, m_all.size, chunk):
        mi, fi = m_all[i:i + chunk], f_all[i:i + chunk]
        w = two_qubit_cell_spectra(trace, params, mi, fi)
        j = int(np.argmin(w[:, 0]))
        if w[j, 0] < best:
            best, best_cell, best_spec = float(w[j, 0]), (float(t[mi[j]]), float(t[fi[j]])), w[j]
    if best_spec is None:
        return NonMarkovReport(0.0, math.nan, math.nan, skipped)
    # structural zeros of the dynamical matrix make eta <= 0; values within
    # eigensolver roundoff of zero are those zeros
    value = 0.0 if best > -ZERO_EIG_TOL else best
    return NonMarkovReport(value, *best_cell, skipped,
                           eigenvalues=tuple(float(v) for v in best_spec))


def revival_stats(trace: DecoherenceTrace) -> RevivalStats:
    """Global echo minimum and the largest echo value strictly after it."""
    _require(trace)
    la = trace.log_abs
    i = int(np.argmin(la))
    later = la[i + 1:]
    if later.size == 0 or not np.max(later) > la[i]:
        raise NoRevival(f"echo minimum at t = {trace.times[i]:.6g} is not followed by a revival")
    j = i + 1 + int(np.argmax(later))
    t = trace.times
    return RevivalStats(float(np.exp(2 * la[i])), float(np.exp(2 * la[j])), float(t[j]), float(t[i]))


def negativity_trace(trace: DecoherenceTrace) -> np.ndarray:
    """E_SA(t) for qubit + ancilla started in |phi+>; equals |x(t)| = sqrt(L(t))."""
    return np.exp(trace.log_abs)


def evolved_bell_state(x: complex) -> np.ndarray:
    """(Phi(t, 0) (x) I)[|phi+><phi+|] in the basis (gg, ge, eg, ee), system first."""
    phi = map_1q(x).matrix.reshape(2, 2, 2, 2)  # [s, s', r, r']
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / math.sqrt(2)
    rho = np.outer(bell, bell.conj()).reshape(2, 2, 2, 2)  # [r, a, r', a']
    out = np.einsum("stuv,uavb->satb", phi, rho)
    return out.reshape(4, 4)


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose the second (ancilla) qubit of a two-qubit density matrix."""
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def negativity_partial_transpose(x: complex) -> float:
    """sum_i (|p_i| - p_i) over the eigenvalues of the partially transposed evolved Bell state."""
    p = eigvals_hermitian(partial_transpose(evolved_bell_state(x)))
    return float(np.sum(np.abs(p) - p))


def witness_N(entanglement) -> float:
    """Sum of all positive increments of the sequence (discrete integral of dE/dt > 0)."""
    e = np.asarray(entanglement, dtype=float)
    if e.size < 2:
        raise ValidationError("witness needs at least two samples")
    d = np.diff(e)
    return float(np.sum(d[d > 0]))


def local_extrema(values) -> tuple[np.ndarray, np.ndarray]:
    """Indices of strict interior local maxima and minima.

    A plateau counts as one point, represented by its first index.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return np.array([], dtype=int), np.array([], dtype=int)
    keep = np.concatenate([[True], v[1:] != v[:-1]])
    idx = np.flatnonzero(keep)
    w = v[idx]
    if w.size < 3:
        return np.array([], dtype=int), np.array([], dtype=int)
    mid = w[1:-1]
    is_max = (mid > w[:-2]) & (mid > w[2:])
    is_min = (mid < w[:-2]) & (mid < w[2:])
    return idx[1:-1][is_max], idx[1:-1][is_min]


def pre_revival_end(trace: DecoherenceTrace) -> float:
    """Default witness window end, tau / 2; the whole trace when there is no revival."""
    try:
        return revival_stats(trace).tau / 2
    except NoRevival:
        return float(trace.times[-1])


def windowed_witness(trace: DecoherenceTrace, t_end: float | None = None) -> float:
    """Witness N of the negativity restricted to t <= t_end (default tau / 2)."""
    if t_end is None:
        t_end = pre_revival_end(trace)
    e = negativity_trace(trace)[trace.times <= t_end]
    if e.size < 2:
        raise ValidationError(f"witness window [.., {t_end}] holds fewer than two grid points")
    return witness_N(e)


def full_report(trace: DecoherenceTrace, tol_sing: float = DEFAULT_TOL_SING,
                witness_end: float | None = None) -> NonMarkovReport:
    """eta plus revival statistics (None when there is no revival) and the windowed witness."""
    rep = eta(trace, tol_sing)
    try:
        rs = revival_stats(trace)
        l_dec, l_rev, tau = rs.l_dec, rs.l_rev, rs.tau
    except NoRevival:
        l_dec = l_rev = tau = None
    wn = windowed_witness(trace, witness_end)
    return NonMarkovReport(rep.eta, rep.argmin_tm, rep.argmin_tf, rep.skipped_cells,
                           rep.log_ratio, l_dec, l_rev, tau, wn)
