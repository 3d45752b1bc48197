"""``fermibath`` command line: one subcommand per computation.

Every run writes CSV (and, where there is something to plot, SVG) into
``--out`` and prints a one-line JSON summary.  Exit status is 0 on success,
1 for invalid input and 2 for numerical failures.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import csvio, svg
from .channel_maps import DEFAULT_TOL_SING
from .echo_engine import TimeGrid, trace_over_grid
from .errors import FermibathError, NumericalError, ValidationError
from .exact_oracle import (MAX_SITES_TWO_QUBIT, oracle_decoherence_factor, oracle_ground_energy,
                           oracle_two_qubit_overlaps)
from .ising_env import IsingParams, TwoQubitParams, build_spectrum, build_two_qubit_spectra
from .echo_engine import decoherence_factor, overlap_two_qubit
from .nonmarkov_measures import (eta, eta_two_qubit, full_report, min_eigenvalue_grid, negativity_trace,
                                 pre_revival_end, witness_N)
from .paired_modes import CSV_HEADER, read_spectrum_csv, spectrum_rows
from .scaling_harness import (GridPolicy, fit_log_eta, lambda_scan, log_spaced_sizes, resolve_workers,
                              sweep_eta)

HEATMAP_MAX_POINTS = 2048
TWO_QUBIT_MAX_POINTS = 1000
ORACLE_TOL = 1e-8

# field name -> (flag, type, default)
FIELDS = {
    "L": ("--L", int, None),
    "lambda": ("--lambda", float, None),
    "delta": ("--delta", float, None),
    "delta1": ("--delta1", float, None),
    "delta2": ("--delta2", float, None),
    "j_s": ("--j-s", float, 1.0),
    "lambda_s": ("--lambda-s", float, 0.5),
    "J": ("--J", float, 1.0),
    "t_start": ("--t-start", float, 0.0),
    "t_end": ("--t-end", float, None),
    "n_points": ("--n-points", int, None),
    "tol_sing": ("--tol-sing", float, DEFAULT_TOL_SING),
    "eps_gamma": ("--eps-gamma", float, 0.01),
    "out": ("--out", str, "."),
    "workers": ("--workers", int, None),
    "spectrum_csv": ("--spectrum-csv", str, None),
    "heatmap": ("--heatmap", bool, False),
    "lambdas": ("--lambdas", str, None),
    "measure": ("--measure", str, "eta"),
    "sizes": ("--sizes", str, None),
    "L_min": ("--L-min", int, 100),
    "L_max": ("--L-max", int, 10000),
    "n_sizes": ("--n-sizes", int, 9),
    "window_end": ("--window-end", float, None),
}

COMMANDS = {
    "spectrum": ("paired-mode table of H_g and H_e", ["L", "lambda", "delta", "J"]),
    "echo": ("decoherence factor and Loschmidt echo on a time grid",
             ["L", "lambda", "delta", "J", "t_start", "t_end", "n_points", "spectrum_csv"]),
    "eta": ("non-Markovianity eta (optionally the full (t_m, t_f) grid)",
            ["L", "lambda", "delta", "J", "t_start", "t_end", "n_points", "tol_sing", "heatmap"]),
    "scan-lambda": ("eta or witness N over a list of fields",
                    ["L", "lambdas", "delta", "measure", "tol_sing", "workers"]),
    "witness": ("negativity trace and witness N",
                ["L", "lambda", "delta", "J", "t_start", "t_end", "n_points", "window_end"]),
    "scaling": ("eta versus lattice size and the ln(-eta) fit",
                ["lambda", "delta", "sizes", "L_min", "L_max", "n_sizes", "tol_sing", "workers"]),
    "two-qubit": ("two-qubit overlaps, eta and the spectrum at the worst cell",
                  ["L", "lambda", "delta1", "delta2", "j_s", "lambda_s", "J", "t_start", "t_end", "n_points",
                   "tol_sing"]),
    "oracle-check": ("compare product formulas with exact diagonalization",
                     ["L", "lambda", "delta", "delta1", "delta2", "J", "t_start", "t_end", "n_points"]),
}
COMMON = ["out", "config"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fermibath", description="Non-Markovian dephasing by a transverse-field Ising ring.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (help_, fields) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_, description=help_)
        for f in fields:
            flag, typ, _ = FIELDS[f]
            if typ is bool:
                sp.add_argument(flag, dest=f, action="store_true", default=argparse.SUPPRESS)
            else:
                sp.add_argument(flag, dest=f, type=typ, default=argparse.SUPPRESS)
        sp.add_argument("--out", dest="out", default=argparse.SUPPRESS, help="output directory")
        sp.add_argument("--config", dest="config", default=argparse.SUPPRESS, help="JSON file with flag values")
    return p


def _normalize_key(k: str) -> str:
    k = k.lstrip("-").replace("-", "_")
    for name, (flag, _, _) in FIELDS.items():
        if k == name or k == flag.lstrip("-").replace("-", "_"):
            return name
    raise ValidationError(f"unknown config key {k!r}")


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationError(f"config {path}: expected a JSON object")
    out = {}
    for k, v in raw.items():
        name = _normalize_key(k)
        typ = FIELDS[name][1]
        try:
            out[name] = v if v is None or typ is str else typ(v)
        except (TypeError, ValueError):
            raise ValidationError(f"config field {k!r}: cannot convert {v!r}") from None
    return out


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Defaults < JSON config < explicit flags."""
    fields = COMMANDS[command][1]
    cfg = {f: FIELDS[f][2] for f in fields}
    cfg["out"] = "."
    given = vars(ns)
    if "config" in given:
        extra = load_config(given["config"])
        bad = set(extra) - set(fields) - {"out"}
        if bad:
            raise ValidationError(f"config keys not used by '{command}': {sorted(bad)}")
        cfg.update(extra)
    cfg.update({k: v for k, v in given.items() if k not in ("command", "config")})
    return cfg


def _need(cfg, *names):
    for n in names:
        if cfg.get(n) is None:
            raise ValidationError(f"missing required parameter '{n}' ({FIELDS[n][0]})")


def _grid(cfg, default_end, default_n, max_points=None) -> TimeGrid:
    t_end = cfg["t_end"] if cfg.get("t_end") is not None else default_end
    n = cfg["n_points"] if cfg.get("n_points") is not None else default_n
    if max_points is not None and n > max_points:
        raise ValidationError(f"n_points = {n} exceeds the limit {max_points} for this command")
    return TimeGrid(float(cfg.get("t_start") or 0.0), float(t_end), n)


def _policy_grid(cfg) -> TimeGrid:
    g = GridPolicy().grid_for(cfg["L"])
    return _grid(cfg, g.t_end, g.n_points)


def _params(cfg) -> IsingParams:
    _need(cfg, "L", "lambda", "delta")
    return IsingParams(cfg["L"], cfg["lambda"], cfg["delta"], cfg.get("J", 1.0))


def _outdir(cfg) -> Path:
    d = Path(cfg["out"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def _parse_list(text, typ, name):
    try:
        return [typ(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"{name}: cannot parse {text!r} as a comma-separated list") from None


def _finite(v):
    return None if v is None or (isinstance(v, float) and not math.isfinite(v)) else v


# ---- subcommands -------------------------------------------------------


def cmd_spectrum(cfg):
    spec = build_spectrum(_params(cfg))
    path = csvio.write_csv(_outdir(cfg) / "spectrum.csv", CSV_HEADER, spectrum_rows(spec), cfg)
    return {"modes": len(spec), "ground_energy_g": spec.ground_energy_g,
            "ground_energy_e": spec.ground_energy_e, "csv": str(path)}


def cmd_echo(cfg):
    if cfg.get("spectrum_csv"):
        spec = read_spectrum_csv(cfg["spectrum_csv"])
        if cfg.get("t_end") is None:
            raise ValidationError("--t-end is required with --spectrum-csv")
        grid = _grid(cfg, None, 4096)
    else:
        spec = build_spectrum(_params(cfg))
        grid = _policy_grid(cfg)
    tr = trace_over_grid(spec, grid)
    out = _outdir(cfg)
    path = csvio.write_csv(out / "echo.csv", csvio.TRACE_HEADER, csvio.trace_rows(tr), cfg)
    svg.write_svg(out / "echo.svg", svg.line_chart([("echo", tr.times, tr.echo)], "Loschmidt echo", "t", "L(t)"))
    return {"min_echo": float(tr.echo.min()), "n_points": grid.n_points, "csv": str(path)}


def cmd_eta(cfg):
    p = _params(cfg)
    spec = build_spectrum(p)
    if cfg.get("heatmap"):
        grid = _grid(cfg, 40.0, 512, HEATMAP_MAX_POINTS)
    else:
        grid = _policy_grid(cfg)
    tr = trace_over_grid(spec, grid, phases=p.lattice_size <= 4096)
    rep = full_report(tr, cfg["tol_sing"])
    out = _outdir(cfg)
    row = (p.lattice_size, p.lam, p.delta, rep.eta, rep.argmin_tm, rep.argmin_tf,
           rep.l_dec, rep.l_rev, rep.tau, rep.skipped_cells)
    files = [csvio.write_csv(out / "eta.csv", csvio.SWEEP_HEADER, [row], cfg)]
    result = {k: _finite(v) for k, v in rep.as_row().items()}
    if cfg.get("heatmap"):
        z = min_eigenvalue_grid(tr, cfg["tol_sing"])
        t = tr.times
        rows = ([tm, *z[i]] for i, tm in enumerate(t))
        files.append(csvio.write_csv(out / "heatmap.csv", ["t_m"] + [csvio.fmt(v) for v in t], rows, cfg))
        svg.write_svg(out / "heatmap.svg", svg.heatmap(z, (t[0], t[-1]), (t[0], t[-1]),
                                                       "minimum eigenvalue of D(t_f, t_m)", "t_f", "t_m"))
        result["heatmap_min"] = float(np.nanmin(z)) if np.any(np.isfinite(z)) else None
    result["csv"] = [str(f) for f in files]
    return result


def cmd_scan_lambda(cfg):
    _need(cfg, "L", "lambdas", "delta")
    lams = _parse_list(cfg["lambdas"], float, "lambdas")
    if not lams:
        raise ValidationError("lambdas: empty list")
    rows = lambda_scan(lams, cfg["L"], cfg["delta"], cfg["measure"], workers=cfg.get("workers"),
                       tol_sing=cfg["tol_sing"])
    out = _outdir(cfg)
    path = csvio.write_csv(out / "scan.csv", ("lambda", "lambda_eff", cfg["measure"]),
                           ((r.lam, r.lambda_eff, r.value) for r in rows), cfg)
    svg.write_svg(out / "scan.svg", svg.line_chart([(cfg["measure"], [r.lambda_eff for r in rows],
                                                      [r.value for r in rows])],
                                                    f"{cfg['measure']} vs field", "lambda + delta", cfg["measure"]))
    best = min(rows, key=lambda r: r.value)
    return {"rows": len(rows), "argmin_lambda": best.lam, "min_value": best.value, "csv": str(path)}


def cmd_witness(cfg):
    spec = build_spectrum(_params(cfg))
    tr = trace_over_grid(spec, _policy_grid(cfg))
    end = cfg["window_end"] if cfg.get("window_end") is not None else pre_revival_end(tr)
    neg = negativity_trace(tr)
    inside = tr.times <= end
    if np.count_nonzero(inside) < 2:
        raise ValidationError(f"window_end = {end} leaves fewer than two grid points")
    n_val = witness_N(neg[inside])
    out = _outdir(cfg)
    path = csvio.write_csv(out / "witness.csv", ("t", "negativity"), zip(tr.times, neg), cfg)
    svg.write_svg(out / "witness.svg", svg.line_chart([("E_SA", tr.times, neg)], "negativity", "t", "E_SA"))
    return {"witness_N": n_val, "window_end": end, "csv": str(path)}


def cmd_scaling(cfg):
    _need(cfg, "lambda", "delta")
    if cfg.get("sizes"):
        sizes = _parse_list(cfg["sizes"], int, "sizes")
    else:
        sizes = log_spaced_sizes(cfg["L_min"], cfg["L_max"], cfg["n_sizes"])
    policy = GridPolicy()
    pts = sweep_eta(sizes, cfg["lambda"], cfg["delta"], policy, cfg.get("workers"), cfg["tol_sing"])
    out = _outdir(cfg)
    prov = dict(cfg, grid_policy=policy.as_dict())
    csvio.write_csv(out / "sweep.csv", csvio.SWEEP_HEADER, (p.csv_row() for p in pts), prov)
    fit = fit_log_eta(pts)
    csvio.write_csv(out / "fit.csv", csvio.FIT_HEADER, [fit.csv_row()], prov)
    L = np.array(fit.sizes, dtype=float)
    svg.write_svg(out / "scaling.svg", svg.line_chart(
        [("ln(-eta)", L, fit.log_neg_eta), ("fit", L, fit.intercept + fit.slope * L)],
        "finite-size scaling", "L", "ln(-eta)"))
    return {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r_squared, "sizes": list(fit.sizes)}


def cmd_two_qubit(cfg):
    _need(cfg, "L", "lambda", "delta1", "delta2")
    p = TwoQubitParams(cfg["L"], cfg["lambda"], cfg["delta1"], cfg["delta2"], cfg["j_s"], cfg["lambda_s"],
                       cfg.get("J", 1.0))
    grid = _grid(cfg, 20.0, 200, TWO_QUBIT_MAX_POINTS)
    tr = trace_over_grid(build_two_qubit_spectra(p), grid)
    rep = eta_two_qubit(tr, p, cfg["tol_sing"])
    out = _outdir(cfg)
    path = csvio.write_csv(out / "two_qubit.csv", csvio.TWO_QUBIT_HEADER, csvio.two_qubit_rows(tr), cfg)
    return {"eta": rep.eta, "argmin_tm": _finite(rep.argmin_tm), "argmin_tf": _finite(rep.argmin_tf),
            "skipped": rep.skipped_cells, "eigenvalues": list(rep.eigenvalues or ()), "csv": str(path)}


def cmd_oracle_check(cfg):
    p = _params(cfg)
    grid = _grid(cfg, 20.0, 200)
    t = grid.points()
    spec = build_spectrum(p)
    dx = float(np.max(np.abs(decoherence_factor(spec, t) - oracle_decoherence_factor(p.lattice_size, p.lam,
                                                                                         p.delta, t, p.coupling_J))))
    de = abs(spec.ground_energy_g - oracle_ground_energy(p.lattice_size, p.lam, p.coupling_J))
    res = {"max_dev_x": dx, "ground_energy_dev": de}
    rows = [("x", dx), ("ground_energy", de)]
    if cfg.get("delta1") is not None or cfg.get("delta2") is not None:
        _need(cfg, "delta1", "delta2")
        if p.lattice_size > MAX_SITES_TWO_QUBIT:
            raise ValidationError(f"two-qubit oracle limited to L <= {MAX_SITES_TWO_QUBIT}")
        q = TwoQubitParams(p.lattice_size, p.lam, cfg["delta1"], cfg["delta2"], coupling_J=p.coupling_J)
        sp = build_two_qubit_spectra(q)
        orc = oracle_two_qubit_overlaps(q.lattice_size, q.lam, q.delta1, q.delta2, t, q.coupling_J)
        for (a, b), ox in zip(((0, 1), (0, 2), (1, 2)), orc):
            d = float(np.max(np.abs(overlap_two_qubit(a, b, sp, t) - ox)))
            res[f"max_dev_x{a}{b}"] = d
            rows.append((f"x{a}{b}", d))
    csvio.write_csv(_outdir(cfg) / "oracle_check.csv", ("quantity", "max_abs_deviation"), rows, cfg)
    worst = max(v for _, v in rows)
    res["pass"] = worst <= ORACLE_TOL
    print(f"max |product - oracle| = {worst:.3e} (tolerance {ORACLE_TOL:.0e})")
    if worst > ORACLE_TOL:
        raise NumericalError(f"oracle deviation {worst:.3e} exceeds {ORACLE_TOL:.0e}")
    return res


HANDLERS = {
    "spectrum": cmd_spectrum,
    "echo": cmd_echo,
    "eta": cmd_eta,
    "scan-lambda": cmd_scan_lambda,
    "witness": cmd_witness,
    "scaling": cmd_scaling,
    "two-qubit": cmd_two_qubit,
    "oracle-check": cmd_oracle_check,
}


def run(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve(ns.command, ns)
        if "workers" in cfg:
            cfg["workers"] = resolve_workers(cfg["workers"])
        result = HANDLERS[ns.command](cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except FermibathError as exc:  # pragma: no cover - every error is one of the two above
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"command": ns.command, **result}, default=float))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
