"""File formats: CSV data with JSON sidecar metadata, tables and run reports.

Trace files
    ``freq_hz,re,im`` or ``freq_hz,mag_db,phase_rad``; sidecar keys
    ``applied_power_dbm``, ``attenuation_db``, ``temperature_k``, ``label``.
Sweep files
    ``x,qi_inv[,sigma]``; sidecar keys ``axis``, ``n_ab``, ``f_r_hz``,
    ``materials``.
Field files
    ``region,h_mag_sq,weight`` with region in {chip, bridge, volume}; sidecar
    key ``f_r_hz``.

The sidecar of ``name.csv`` is ``name.meta.json``. Floats are written with
17 significant digits so every file reads back bit-exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .fields import FieldSampleSet
from .resonance import S21Trace
from .sweeps import LossSweep


class ParseError(ValueError):
    """A data file is empty, malformed or inconsistent with its sidecar."""


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def read_sidecar(path):
    side = sidecar_path(path)
    if not side.exists():
        return {}
    try:
        return json.loads(side.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{side}: invalid JSON ({exc})") from None


def write_sidecar(path, meta):
    sidecar_path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def _read_rows(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError(f"{path}: empty file")
    reader = csv.reader(lines)
    header = [h.strip().lower() for h in next(reader)]
    rows = [r for r in reader]
    if not rows:
        raise ParseError(f"{path}: header but no data rows")
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise ParseError(f"{path}: row {i + 2} has {len(r)} fields, expected {len(header)}")
    return header, rows


def _column(path, header, rows, name, convert=float):
    idx = header.index(name)
    try:
        return [convert(r[idx].strip()) for r in rows]
    except ValueError as exc:
        raise ParseError(f"{path}: bad value in column {name!r} ({exc})") from None


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def csv_text(header, rows):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


# -- traces -----------------------------------------------------------------------


def read_trace(path) -> S21Trace:
    header, rows = _read_rows(path)
    if header[:1] != ["freq_hz"]:
        raise ParseError(f"{path}: first column must be freq_hz")
    freqs = np.array(_column(path, header, rows, "freq_hz"))
    if "re" in header and "im" in header:
        values = np.array(_column(path, header, rows, "re")) + 1j * np.array(_column(path, header, rows, "im"))
    elif "mag_db" in header and "phase_rad" in header:
        mag = 10.0 ** (np.array(_column(path, header, rows, "mag_db")) / 20.0)
        values = mag * np.exp(1j * np.array(_column(path, header, rows, "phase_rad")))
    else:
        raise ParseError(f"{path}: expected columns re,im or mag_db,phase_rad")
    meta = read_sidecar(path)
    try:
        return S21Trace(
            freqs, values,
            applied_power=meta.get("applied_power_dbm"),
            line_attenuation=meta.get("attenuation_db", 70.0),
            temperature=meta.get("temperature_k"),
            label=meta.get("label", {}),
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def write_trace(path, trace: S21Trace):
    rows = zip(trace.freqs, trace.values.real, trace.values.imag)
    write_csv(path, ["freq_hz", "re", "im"], rows)
    meta = {"attenuation_db": trace.line_attenuation, "label": trace.label}
    if trace.applied_power is not None:
        meta["applied_power_dbm"] = trace.applied_power
    if trace.temperature is not None:
        meta["temperature_k"] = trace.temperature
    write_sidecar(path, meta)


# -- sweeps -----------------------------------------------------------------------


def read_sweep(path) -> LossSweep:
    header, rows = _read_rows(path)
    if header[:2] != ["x", "qi_inv"]:
        raise ParseError(f"{path}: header must start with x,qi_inv")
    x = _column(path, header, rows, "x")
    q = _column(path, header, rows, "qi_inv")
    sigma = _column(path, header, rows, "sigma") if "sigma" in header else None
    meta = read_sidecar(path)
    try:
        return LossSweep(
            axis=meta.get("axis", "temperature"),
            x=x, q_inv=q, sigma=sigma,
            n_ab=meta.get("n_ab"),
            f_r=float(meta.get("f_r_hz", 6e9)),
            is_difference=bool(meta.get("is_difference", False)),
            meta={"materials": meta.get("materials", {})},
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def write_sweep(path, sweep: LossSweep):
    if sweep.sigma is not None:
        write_csv(path, ["x", "qi_inv", "sigma"], zip(sweep.x, sweep.q_inv, sweep.sigma))
    else:
        write_csv(path, ["x", "qi_inv"], zip(sweep.x, sweep.q_inv))
    meta = {"axis": sweep.axis, "n_ab": sweep.n_ab, "f_r_hz": sweep.f_r,
            "materials": sweep.meta.get("materials", {})}
    if sweep.is_difference:
        meta["is_difference"] = True
    write_sidecar(path, meta)


# -- fields -----------------------------------------------------------------------

DEFAULT_FIELD_COLUMNS = {"region": "region", "h_mag_sq": "h_mag_sq", "weight": "weight"}


def read_fields(path, f_r=None, columns=None, region_map=None, h_is_magnitude=False):
    """Read field samples, optionally remapping solver-specific columns.

    ``columns`` maps the canonical names ``region``, ``h_mag_sq`` and
    ``weight`` to the file's header names; ``region_map`` maps file region
    labels onto chip/bridge/volume. With ``h_is_magnitude`` the field column
    holds |H| and is squared on import.
    """
    cols = dict(DEFAULT_FIELD_COLUMNS)
    cols.update({k: v.lower() for k, v in (columns or {}).items()})
    header, rows = _read_rows(path)
    for canon, name in cols.items():
        if name not in header:
            raise ParseError(f"{path}: missing column {name!r} (for {canon})")
    rmap = {k.lower(): v for k, v in (region_map or {}).items()}
    regions = [rmap.get(r.lower(), r.lower()) for r in _column(path, header, rows, cols["region"], str)]
    h = np.array(_column(path, header, rows, cols["h_mag_sq"]))
    if h_is_magnitude:
        h = h * h
    w = _column(path, header, rows, cols["weight"])
    if f_r is None:
        f_r = read_sidecar(path).get("f_r_hz")
    if f_r is None:
        raise ParseError(f"{path}: resonance frequency not given (sidecar f_r_hz or --f)")
    try:
        return FieldSampleSet.from_rows(zip(regions, h, w), float(f_r))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def write_fields(path, samples: FieldSampleSet):
    write_csv(path, ["region", "h_mag_sq", "weight"], samples.rows())
    write_sidecar(path, {"f_r_hz": samples.f_r})


# -- reports ----------------------------------------------------------------------


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_report(header, body):
    """Report JSON: volatile fields (timestamps) live in ``header`` only."""
    return json.dumps({"header": _clean(header), "body": _clean(body)}, sort_keys=True, indent=2) + "\n"


def report_body_text(text):
    """Canonical serialisation of a report's body, for determinism checks."""
    return json.dumps(json.loads(text)["body"], sort_keys=True, indent=2)
