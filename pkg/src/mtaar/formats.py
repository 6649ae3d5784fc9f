"""Plain-text tensor files, key=value metadata, JSON reports and CSV traces.

Tensor text format::

    m n
    v_1 v_2 ... v_{n^m}

Values are in lexicographic index order (first index slowest) and are written
with ``repr`` so reading them back reproduces the exact doubles.

JSON report schema (one object)::

    method, precond, converged, iterations, final_residual, stopping_mode,
    total_flops, wall_time_s, nonpositive_iterate_flag, flags, solution,
    residual_history, cumulative_flops, wall_ms, problem (label plus m, n)
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .config import SolveReport
from .errors import InvalidDimensionError
from .problems import ProblemInstance
from .tensor import DenseTensor

TRACE_COLUMNS = ("iter", "residual", "cumulative_flops", "wall_ms")
_PER_LINE = 8


def format_tensor(A: DenseTensor) -> str:
    flat = A.data
    lines = [f"{A.order} {A.dim}"]
    for start in range(0, flat.size, _PER_LINE):
        lines.append(" ".join(repr(float(v)) for v in flat[start:start + _PER_LINE]))
    return "\n".join(lines) + "\n"


def parse_tensor(text: str) -> DenseTensor:
    tokens = text.split()
    if len(tokens) < 2:
        raise InvalidDimensionError("missing 'm n' header")
    m, n = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if m < 1 or n < 1 or len(values) != n**m:
        raise InvalidDimensionError(f"header says {n}^{m} = {n**m} values, found {len(values)}")
    return DenseTensor.from_flat(m, n, np.array([float(v) for v in values]))


def write_tensor(path, A: DenseTensor) -> None:
    Path(path).write_text(format_tensor(A))


def read_tensor(path) -> DenseTensor:
    return parse_tensor(Path(path).read_text())


def _vec(v) -> str:
    return " ".join(repr(float(x)) for x in v)


def format_metadata(P: ProblemInstance) -> str:
    fields = {
        "label": P.label,
        "m": P.m,
        "n": P.n,
        "b": _vec(P.b),
        "x0": _vec(P.x0),
        "stopping_mode": P.stopping_mode,
    }
    if P.tol is not None:
        fields["tol"] = repr(P.tol)
    return "".join(f"{k}={v}\n" for k, v in fields.items())


def parse_metadata(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"not a key=value line: {line!r}")
        out[key.strip()] = value.strip()
    for key in ("b", "x0"):
        if key in out:
            out[key] = np.array([float(v) for v in out[key].split()])
    for key in ("m", "n"):
        if key in out:
            out[key] = int(out[key])
    if "tol" in out:
        out["tol"] = float(out["tol"])
    return out


def save_problem(stem, P: ProblemInstance) -> tuple:
    """Write ``<stem>.tensor`` and ``<stem>.meta``; return both paths."""
    stem = Path(stem)
    tpath, mpath = stem.with_suffix(".tensor"), stem.with_suffix(".meta")
    write_tensor(tpath, P.A)
    mpath.write_text(format_metadata(P))
    return tpath, mpath


def load_problem(stem) -> ProblemInstance:
    stem = Path(stem)
    A = read_tensor(stem.with_suffix(".tensor"))
    meta = parse_metadata(stem.with_suffix(".meta").read_text())
    return ProblemInstance(
        A=A,
        b=meta["b"],
        x0=meta["x0"],
        label=meta.get("label", stem.name),
        stopping_mode=meta.get("stopping_mode", "relative"),
        tol=meta.get("tol"),
    )


def report_json(report: SolveReport, problem: ProblemInstance = None) -> str:
    payload = report.to_dict()
    if problem is not None:
        payload["problem"] = {"label": problem.label, "m": problem.m, "n": problem.n}
    return json.dumps(payload, indent=2)


def trace_rows(report: SolveReport):
    """One row per recorded residual (row 0 is the initial guess)."""
    wall = report.wall_ms or [0.0] * len(report.residual_history)
    for k, (res, fl, ms) in enumerate(zip(report.residual_history, report.cumulative_flops, wall)):
        yield {"iter": k, "residual": repr(float(res)), "cumulative_flops": int(fl), "wall_ms": f"{ms:.3f}"}


def write_trace(path, report: SolveReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS)
        writer.writeheader()
        writer.writerows(trace_rows(report))


def write_report(out, report: SolveReport, problem: ProblemInstance = None) -> tuple:
    """Write ``<out>.json`` and ``<out>.csv``; return both paths."""
    out = Path(out)
    if out.suffix in (".json", ".csv"):
        out = out.with_suffix("")
    out.parent.mkdir(parents=True, exist_ok=True)
    jpath, cpath = out.with_suffix(".json"), out.with_suffix(".csv")
    jpath.write_text(report_json(report, problem))
    write_trace(cpath, report)
    return jpath, cpath
