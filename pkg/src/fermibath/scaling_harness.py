"""Finite-size sweeps: eta versus lattice size and field, scaling fits, onset times.

Large-L sweeps run on modulus-only traces (log|x| from the compiled kernel),
so lattices of 10^5 sites fit in memory and |x| far below the double range
is still handled.  Results are merged in parameter order, so the output does
not depend on the worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel_maps import DEFAULT_TOL_SING
from .echo_engine import DecoherenceTrace, TimeGrid, trace_over_grid
from .errors import GridMismatch, InsufficientPoints, NoOnset, NoRevival, NonNegativeEta, ValidationError
from .ising_env import IsingParams, build_spectrum
from .nonmarkov_measures import eta, revival_stats, windowed_witness


@dataclass(frozen=True)
class GridPolicy:
    """t_end = t_factor * L, n_points = max(min_points, points_per_site * L), starting at 0."""

    t_factor: float = 0.75
    min_points: int = 4096
    points_per_site: int = 8

    def grid_for(self, L: int) -> TimeGrid:
        return TimeGrid(0.0, self.t_factor * L, max(self.min_points, self.points_per_site * L))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepPoint:
    L: int
    lam: float
    delta: float
    eta: float
    tm_star: float
    tf_star: float
    log_neg_eta: float
    log_ratio: float  # ln(1 - eta) = ln max |y|
    l_dec: float | None
    l_rev: float | None
    tau: float | None
    skipped: int
    t_end: float
    n_points: int

    def csv_row(self):
        return (self.L, self.lam, self.delta, self.eta, self.tm_star, self.tf_star,
                self.l_dec, self.l_rev, self.tau, self.skipped)


@dataclass(frozen=True)
class ScalingFit:
    sizes: tuple
    log_neg_eta: tuple
    slope: float
    intercept: float
    r_squared: float

    @property
    def n_points(self) -> int:
        return len(self.sizes)

    def csv_row(self):
        return (self.slope, self.intercept, self.r_squared, self.n_points)


def _sweep_one(args) -> SweepPoint:
    L, lam, delta, policy, tol_sing = args
    grid = policy.grid_for(L)
    tr = trace_over_grid(build_spectrum(IsingParams(L, lam, delta)), grid, phases=False)
    rep = eta(tr, tol_sing)
    try:
        rs = revival_stats(tr)
        l_dec, l_rev, tau = rs.l_dec, rs.l_rev, rs.tau
    except NoRevival:
        l_dec = l_rev = tau = None
    return SweepPoint(int(L), float(lam), float(delta), rep.eta, rep.argmin_tm, rep.argmin_tf,
                      rep.log_neg_eta, rep.log_ratio, l_dec, l_rev, tau, rep.skipped_cells, grid.t_end, grid.n_points)


def resolve_workers(workers: int | None) -> int:
    """Explicit value, else $FERMIBATH_WORKERS, else 1."""
    if workers is None:
        env = os.environ.get("FERMIBATH_WORKERS", "").strip()
        if not env:
            return 1
        try:
            workers = int(env)
        except ValueError:
            raise ValidationError(f"FERMIBATH_WORKERS must be an integer, got {env!r}") from None
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    return workers


def _map(fn, jobs, workers):
    workers = resolve_workers(workers)
    if workers == 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))  # map preserves submission order


def sweep_eta(L_list, lam: float, delta: float, policy: GridPolicy | None = None,
              workers: int | None = None, tol_sing: float = DEFAULT_TOL_SING) -> list[SweepPoint]:
    """eta (and revival statistics) for each lattice size, in the order given."""
    policy = policy or GridPolicy()
    jobs = [(int(L), lam, delta, policy, tol_sing) for L in L_list]
    return _map(_sweep_one, jobs, workers)


def log_spaced_sizes(L_min: int, L_max: int, n: int) -> list[int]:
    """n distinct even sizes, roughly log-spaced on [L_min, L_max]."""
    raw = np.geomspace(L_min, L_max, n)
    sizes = sorted({int(2 * round(v / 2)) for v in raw})
    return sizes


def _ols(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - intercept - slope * x) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return slope, intercept, min(1.0, max(0.0, r2))


def fit_log_eta(points) -> ScalingFit:
    """OLS of ln(-eta) on L.

    ``points`` holds (L, eta) pairs or :class:`SweepPoint` records; for the
    latter ln(-eta) is taken from the log-space value, which stays finite when
    -eta overflows a double.
    """
    L, y = [], []
    for p in points:
        if isinstance(p, SweepPoint):
            size, e, ly = p.L, p.eta, p.log_neg_eta
        else:
            size, e = p
            ly = math.log(-e) if e < 0 else -math.inf
        if not e < 0:
            raise NonNegativeEta(f"eta = {e!r} at L = {size} is not negative")
        L.append(size)
        y.append(ly)
    if len(L) < 3:
        raise InsufficientPoints(f"need at least 3 points with eta < 0, got {len(L)}")
    order = np.argsort(L, kind="stable")
    L = [L[i] for i in order]
    y = [y[i] for i in order]
    if any(b <= a for a, b in zip(L, L[1:])):
        raise ValidationError("lattice sizes must be distinct")
    slope, intercept, r2 = _ols(L, y)
    return ScalingFit(tuple(L), tuple(y), slope, intercept, r2)


def fit_log_one_minus_eta(points) -> ScalingFit:
    """Diagnostic: OLS of ln(1 - eta) = ln max|y| on L (per-site growth of the revival ratio)."""
    L = [p.L for p in points]
    if len(L) < 3:
        raise InsufficientPoints(f"need at least 3 points, got {len(L)}")
    y = [p.log_ratio for p in points]
    slope, intercept, r2 = _ols(L, y)
    return ScalingFit(tuple(L), tuple(y), slope, intercept, r2)


@dataclass(frozen=True)
class OriginFit:
    slope: float
    r_squared: float


def fit_through_origin(x, y) -> OriginFit:
    """y = c x by least squares; R^2 against the mean of y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise InsufficientPoints("need at least 2 points")
    c = float(np.dot(x, y) / np.dot(x, x))
    ss_res = float(np.sum((y - c * x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return OriginFit(c, 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0)


def revival_times(L_list, lam: float, delta: float, policy: GridPolicy | None = None,
                  workers: int | None = None) -> list[float]:
    """tau(L) for each size; raises NoRevival if a window misses the revival."""
    pts = sweep_eta(L_list, lam, delta, policy, workers)
    for p in pts:
        if p.tau is None:
            raise NoRevival(f"no revival within t <= {p.t_end} at L = {p.L}")
    return [p.tau for p in pts]


def chaos_onset(trace_L: DecoherenceTrace, trace_2L: DecoherenceTrace, eps_gamma: float = 0.01,
                mode: str = "density") -> float:
    """Earliest grid time at which the traces of two lattice sizes part ways.

    ``mode="density"`` (default) compares the per-site log-echo ln(L(t)) / L:
    the first t with |d_2L / d_L - 1| > eps_gamma.  Before the onset the
    curves differ only in amplitude and ln(echo) is extensive, so the ratio
    sits at 1 there.  Sizes come from the traces' ``meta["lattice_size"]``.
    ``mode="absolute"`` uses |L_L(t) - L_2L(t)| > eps_gamma instead.
    """
    if trace_L.grid != trace_2L.grid:
        raise GridMismatch(f"grids differ: {trace_L.grid} vs {trace_2L.grid}")
    if not eps_gamma > 0:
        raise ValidationError(f"eps_gamma must be > 0, got {eps_gamma}")
    t = trace_L.times
    if mode == "absolute":
        dev = np.abs(trace_L.echo - trace_2L.echo)
    elif mode == "density":
        sizes = [tr.meta.get("lattice_size") for tr in (trace_L, trace_2L)]
        if None in sizes:
            raise ValidationError("density mode needs meta['lattice_size'] on both traces")
        a = trace_L.log_abs / sizes[0]
        b = trace_2L.log_abs / sizes[1]
        with np.errstate(divide="ignore", invalid="ignore"):
            dev = np.abs(b / a - 1.0)
        # both exactly flat (t = 0, or no perturbation): identical shapes
        dev[(a == 0) & (b == 0)] = 0.0
        dev[(a == 0) & (b != 0)] = np.inf
    else:
        raise ValidationError(f"unknown chaos-onset mode {mode!r}")
    hit = np.flatnonzero(dev > eps_gamma)
    if hit.size == 0:
        raise NoOnset(f"traces agree within eps_gamma = {eps_gamma} on the whole grid")
    return float(t[hit[0]])


def _scan_one(args):
    lam, L, delta, measure, policy, tol_sing = args
    if measure == "eta":
        return _sweep_one((L, lam, delta, policy, tol_sing))
    tr = trace_over_grid(build_spectrum(IsingParams(L, lam, delta)), policy.grid_for(L), phases=False)
    return windowed_witness(tr)


@dataclass(frozen=True)
class ScanRow:
    lam: float
    lambda_eff: float
    value: float
    detail: SweepPoint | None = None


def lambda_scan(lambda_list, L: int, delta: float, measure: str = "eta",
                policy: GridPolicy | None = None, workers: int | None = None,
                tol_sing: float = DEFAULT_TOL_SING) -> list[ScanRow]:
    """eta or the witness N (pre-revival window) for each lambda, in the order given."""
    if measure not in ("eta", "witness"):
        raise ValidationError(f"measure must be 'eta' or 'witness', got {measure!r}")
    policy = policy or GridPolicy()
    jobs = [(float(lam), int(L), delta, measure, policy, tol_sing) for lam in lambda_list]
    res = _map(_scan_one, jobs, workers)
    if measure == "eta":
        return [ScanRow(j[0], j[0] + delta, r.eta, r) for j, r in zip(jobs, res)]
    return [ScanRow(j[0], j[0] + delta, float(r)) for j, r in zip(jobs, res)]
