import math

import numpy as np
import pytest

from fermibath import csvio
from fermibath.echo_engine import TimeGrid, trace_over_grid
from fermibath.errors import GridMismatch, InsufficientPoints, NoOnset, NonNegativeEta, ValidationError
from fermibath.exact_oracle import oracle_decoherence_factor
from fermibath.ising_env import IsingParams, build_spectrum
from fermibath.nonmarkov_measures import eta, windowed_witness
from fermibath.scaling_harness import (GridPolicy, chaos_onset, fit_log_eta, fit_log_one_minus_eta,
                                       fit_through_origin, lambda_scan, log_spaced_sizes, resolve_workers,
                                       revival_times, sweep_eta)


def test_grid_policy():
    g = GridPolicy().grid_for(100)
    assert (g.t_start, g.t_end, g.n_points) == (0.0, 75.0, 4096)
    assert GridPolicy().grid_for(1000).n_points == 8000


def test_uncoupled_sweep_is_zero():
    assert all(p.eta == 0 for p in sweep_eta([20, 40], 0.7, 0.0))


def test_critical_eta_grows_with_L():
    e = [p.eta for p in sweep_eta([20, 40, 80], 0.99, 0.01)]
    assert -e[0] < -e[1] < -e[2]


def test_small_lattice_matches_oracle():
    policy = GridPolicy(t_factor=2.5, min_points=1024)
    (p,) = sweep_eta([8], 0.5, 0.5, policy)
    g = policy.grid_for(8)
    a = np.abs(oracle_decoherence_factor(8, 0.5, 0.5, g.points()))
    ratio = a[None, :] / a[:, None]
    brute = min(0.0, float(np.min(1 - ratio[np.triu_indices(a.size, 1)])))
    assert p.eta == pytest.approx(brute, abs=1e-10)
    assert p.eta < 0


def test_fit_exact_exponential():
    L = [100, 200, 400, 800]
    fit = fit_log_eta([(n, -math.exp(0.002 * n)) for n in L])
    assert abs(fit.slope - 0.002) < 1e-12
    assert abs(fit.intercept) < 1e-12
    assert fit.r_squared == 1.0
    assert fit.sizes == tuple(L) and fit.n_points == 4


def test_fit_sorts_sizes():
    fit = fit_log_eta([(300, -math.exp(0.6)), (100, -math.exp(0.2)), (200, -math.exp(0.4))])
    assert fit.sizes == (100, 200, 300)
    assert fit.slope == pytest.approx(0.002, abs=1e-12)


def test_fit_errors():
    with pytest.raises(InsufficientPoints):
        fit_log_eta([(10, -1.0), (20, -2.0)])
    with pytest.raises(NonNegativeEta):
        fit_log_eta([(10, -1.0), (20, 0.0), (30, -2.0)])


def test_fit_uses_log_space_values():
    pts = sweep_eta([100, 200, 400], 0.99, 0.01)
    fit = fit_log_eta(pts)
    assert fit.log_neg_eta == pytest.approx([math.log(-p.eta) for p in pts], rel=1e-10)
    diag = fit_log_one_minus_eta(pts)
    assert diag.log_neg_eta == pytest.approx([math.log1p(-p.eta) for p in pts], rel=1e-10)


def test_revival_time_linear_in_L():
    L = [50, 100, 200, 400]
    fit = fit_through_origin(L, revival_times(L, 0.99, 0.01))
    assert fit.r_squared >= 0.99
    assert fit.slope == pytest.approx(0.5, rel=0.02)


def test_workers_do_not_change_output(monkeypatch):
    L = [20, 30, 40]
    a = csvio.render_csv(csvio.SWEEP_HEADER, (p.csv_row() for p in sweep_eta(L, 0.9, 0.05, workers=1)))
    b = csvio.render_csv(csvio.SWEEP_HEADER, (p.csv_row() for p in sweep_eta(L, 0.9, 0.05, workers=2)))
    monkeypatch.setenv("FERMIBATH_WORKERS", "2")
    c = csvio.render_csv(csvio.SWEEP_HEADER, (p.csv_row() for p in sweep_eta(L[::-1], 0.9, 0.05)[::-1]))
    assert a == b == c


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv("FERMIBATH_WORKERS", raising=False)
    assert resolve_workers(None) == 1
    monkeypatch.setenv("FERMIBATH_WORKERS", "3")
    assert resolve_workers(None) == 3
    assert resolve_workers(2) == 2
    monkeypatch.setenv("FERMIBATH_WORKERS", "x")
    with pytest.raises(ValidationError):
        resolve_workers(None)
    with pytest.raises(ValidationError):
        resolve_workers(0)


def test_log_spaced_sizes():
    s = log_spaced_sizes(100, 10000, 9)
    assert s[0] == 100 and s[-1] == 10000 and len(s) == 9
    assert all(v % 2 == 0 for v in s)


def _modulus_trace(L, lam, delta, grid):
    return trace_over_grid(build_spectrum(IsingParams(L, lam, delta)), grid, phases=False)


def test_chaos_onset_identical_traces():
    g = TimeGrid(0, 50, 500)
    tr = _modulus_trace(100, 0.89, 0.01, g)
    for mode in ("density", "absolute"):
        with pytest.raises(NoOnset):
            chaos_onset(tr, tr, mode=mode)


def test_chaos_onset_uncoupled():
    g = TimeGrid(0, 50, 500)
    a, b = _modulus_trace(100, 0.89, 0.0, g), _modulus_trace(200, 0.89, 0.0, g)
    for mode in ("density", "absolute"):
        with pytest.raises(NoOnset):
            chaos_onset(a, b, mode=mode)


def test_chaos_onset_grid_mismatch():
    with pytest.raises(GridMismatch):
        chaos_onset(_modulus_trace(10, 0.5, 0.1, TimeGrid(0, 5, 50)), _modulus_trace(20, 0.5, 0.1, TimeGrid(0, 5, 51)))
    with pytest.raises(ValidationError):
        g = TimeGrid(0, 5, 50)
        chaos_onset(_modulus_trace(10, 0.5, 0.1, g), _modulus_trace(20, 0.5, 0.1, g), mode="other")


def test_chaos_onset_scales_with_L():
    g = TimeGrid(0, 200, 8001)
    tr = {L: _modulus_trace(L, 0.89, 0.01, g) for L in (100, 200, 400)}
    ratio = chaos_onset(tr[200], tr[400]) / chaos_onset(tr[100], tr[200])
    assert ratio == pytest.approx(2, rel=0.15)


def test_lambda_scan_peaks_at_critical_field():
    lams = np.round(np.arange(0.90, 1.081, 0.01), 2)
    rows = lambda_scan(lams, 80, 0.01)
    best = min(rows, key=lambda r: r.value)
    assert abs(best.lam - 0.99) <= 0.01 + 1e-12


def test_witness_scan_vanishes_at_critical_field():
    rows = lambda_scan([0.89, 0.99, 1.09], 100, 0.01, measure="witness")
    assert rows[1].value <= 1e-6
    assert rows[0].value > 0 and rows[2].value > 0


def test_single_lambda_scan_is_point_measure():
    (row,) = lambda_scan([0.9], 40, 0.05)
    g = GridPolicy().grid_for(40)
    assert row.value == eta(_modulus_trace(40, 0.9, 0.05, g)).eta
    (row,) = lambda_scan([0.9], 40, 0.05, measure="witness")
    assert row.value == windowed_witness(_modulus_trace(40, 0.9, 0.05, g))


def test_lambda_scan_rejects_measure():
    with pytest.raises(ValidationError):
        lambda_scan([0.9], 40, 0.05, measure="foo")
