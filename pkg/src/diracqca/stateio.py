"""JSON state files and tabular output.

State files look like::

    {"sites": [{"x": 0, "R": [1.0, 0.0], "L": [0.0, 0.0]}, ...], "time": 0}

``time`` is optional.  Complex numbers are ``[re, im]`` pairs.
"""
from __future__ import annotations

import io
import json
import math
import warnings
from pathlib import Path

import numpy as np

from .core import FieldState
from .pathsum import PropagatorKernel

NORM_WARN_TOL = 1e-9


class StateFormatError(ValueError):
    pass


def _pair(value, where: str) -> complex:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise StateFormatError(f"{where}: expected [re, im] pair of numbers, got {value!r}")
    z = complex(float(value[0]), float(value[1]))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise StateFormatError(f"{where}: amplitude must be finite")
    return z


def parse_state(doc) -> FieldState:
    if not isinstance(doc, dict) or "sites" not in doc:
        raise StateFormatError("top level: expected an object with a 'sites' array")
    sites = doc["sites"]
    if not isinstance(sites, list):
        raise StateFormatError("'sites': expected an array")
    time = doc.get("time", 0)
    if not isinstance(time, int) or isinstance(time, bool) or time < 0:
        raise StateFormatError(f"'time': expected a non-negative integer, got {time!r}")
    values = {}
    for i, site in enumerate(sites):
        where = f"sites[{i}]"
        if not isinstance(site, dict):
            raise StateFormatError(f"{where}: expected an object")
        for key in ("x", "R", "L"):
            if key not in site:
                raise StateFormatError(f"{where}: missing field '{key}'")
        x = site["x"]
        if not isinstance(x, int) or isinstance(x, bool):
            raise StateFormatError(f"{where}.x: expected an integer, got {x!r}")
        if x in values:
            raise StateFormatError(f"{where}.x: duplicate site {x}")
        values[x] = (_pair(site["R"], f"{where}.R"), _pair(site["L"], f"{where}.L"))
    if not values:
        return FieldState(0, np.zeros((0, 2), dtype=complex), time)
    lo, hi = min(values), max(values)
    amps = np.zeros((hi - lo + 1, 2), dtype=complex)
    for x, (r, l) in values.items():
        amps[x - lo] = (r, l)
    return FieldState(lo, amps, time)


def load_state(path) -> FieldState:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    state = parse_state(doc)
    drift = abs(state.norm2() - 1.0)
    if drift > NORM_WARN_TOL:
        warnings.warn(f"{path}: squared norm {state.norm2():.17g} deviates from 1", stacklevel=2)
    return state


def state_document(state: FieldState) -> dict:
    return {
        "time": state.time,
        "sites": [
            {"x": int(x), "R": [a[0].real, a[0].imag], "L": [a[1].real, a[1].imag]}
            for x, a in zip(state.sites, state.amplitudes)
        ],
    }


def write_state(state: FieldState, path) -> None:
    Path(path).write_text(json.dumps(state_document(state)) + "\n")


def fmt(v: float) -> str:
    return f"{v:.17g}"


def evolve_rows(state: FieldState, start: int, stop: int):
    amps = state.window(start, stop)
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    for j, x in enumerate(range(start, stop)):
        r, l = amps[j]
        yield x, float(probs[j]), r.real, r.imag, l.real, l.imag


def evolve_table(state: FieldState, start: int, stop: int, fmt_name: str, meta: dict) -> str:
    rows = list(evolve_rows(state, start, stop))
    if fmt_name == "json":
        doc = dict(meta)
        doc["sites"] = [{"x": x, "prob": p, "R": [rr, ri], "L": [lr, li]}
                        for x, p, rr, ri, lr, li in rows]
        return json.dumps(doc) + "\n"
    out = io.StringIO()
    out.write("x,prob,reR,imR,reL,imL\n")
    for x, *vals in rows:
        out.write(",".join([str(x)] + [fmt(v) for v in vals]) + "\n")
    return out.getvalue()


def kernel_table(k: PropagatorKernel, fmt_name: str, meta: dict) -> str:
    rows = [(d, a, b, complex(k[d][a, b])) for d in k.displacements for a in (0, 1) for b in (0, 1)]
    if fmt_name == "json":
        doc = dict(meta)
        doc["entries"] = [{"d": d, "row": a, "col": b, "value": [z.real, z.imag]} for d, a, b, z in rows]
        return json.dumps(doc) + "\n"
    out = io.StringIO()
    out.write("d,row,col,re,im\n")
    for d, a, b, z in rows:
        out.write(f"{d},{a},{b},{fmt(z.real)},{fmt(z.imag)}\n")
    return out.getvalue()
