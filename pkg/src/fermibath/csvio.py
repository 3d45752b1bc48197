"""CSV output with a provenance header.

Every file starts with ``# config: {...}`` (the full run configuration as
JSON) and writes floats with 17 significant digits so that values survive a
text round trip bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

TRACE_HEADER = ("t", "re_x", "im_x", "abs_x", "echo")
TWO_QUBIT_HEADER = ("t", "re_x01", "im_x01", "re_x02", "im_x02", "re_x12", "im_x12")
SWEEP_HEADER = ("L", "lambda", "delta", "eta", "tm_star", "tf_star", "l_dec", "l_rev", "tau", "skipped")
FIT_HEADER = ("slope", "intercept", "r2", "n_points")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def config_line(config: dict | None) -> str:
    return "# config: " + json.dumps(config or {}, sort_keys=True, default=_json_default)


def render_csv(header: Sequence[str], rows: Iterable[Sequence], config: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(config_line(config) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, config=None) -> Path:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(header, rows, config))
    return path


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """(config, header, rows); comment lines other than the config are skipped."""
    config = {}
    lines = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif not line.startswith("#") and line.strip():
            lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return config, header, [r for r in reader]


def trace_rows(trace):
    x = trace.x if trace.x is not None else np.full(trace.grid.n_points, np.nan + 0j)
    return zip(trace.times, x.real, x.imag, trace.abs_x, trace.echo)


def two_qubit_rows(trace):
    x01, x02, x12 = trace.components()
    return zip(trace.times, x01.real, x01.imag, x02.real, x02.imag, x12.real, x12.imag)


def matrix_rows(m: np.ndarray):
    """Complex matrix as (row, col, re, im) records."""
    m = np.asarray(m)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            z = complex(m[i, j])
            yield i, j, z.real, z.imag
