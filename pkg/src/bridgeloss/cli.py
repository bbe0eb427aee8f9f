"""Command-line front end.

Exit codes: 0 success, 1 analysis failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, io, kernels, synth
from .conductivity import (
    DomainError,
    QuadratureError,
    complex_conductivity,
    kinetic_inductance,
    penetration_depth,
    surface_resistance,
)
from .config import ConfigError, load_config
from .fields import IncompleteDataError, field_report
from .loss_models import (
    CompositeLossModel,
    ResonatorGeometry,
    composite_loss,
    fractional_frequency_shift,
)
from .resonance import FitConvergenceError, FitInitError, evaluate_s21, fit_s21
from .sweeps import (
    InsufficientDataError,
    delta_qi,
    fit_participation,
    fit_participation_shared,
    fit_power_sweep,
    predicted_curve,
)
from .units import UnitError, parse_quantity, parse_range

log = logging.getLogger("bridgeloss")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- helpers ----------------------------------------------------------------------


def _config(args):
    cfg = load_config(args.config)
    if args.attenuation_db is not None:
        cfg = dataclasses.replace(cfg, attenuation_db=args.attenuation_db)
    return cfg


def _out_dir(args, cfg):
    out = Path(args.out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _header():
    return {"created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}


def _provenance(cfg, paths):
    return {
        "tool": "bridgeloss",
        "version": __version__,
        "config_sha256": cfg.digest(),
        "inputs": [{"path": str(p), "sha256": io.file_digest(p) if Path(p).exists() else None}
                   for p in paths],
    }


def _emit_table(args, out_name, header, rows):
    """Table to stdout, or to ``--out-dir`` when given."""
    if args.format == "json":
        text = io.dumps_report({}, {"columns": header, "rows": [list(r) for r in rows]})
    else:
        text = io.csv_text(header, rows)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{out_name}.{args.format}"
        path.write_text(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def _write_report(out, name, cfg, body, rows_key=None):
    if "json" in cfg.formats:
        (out / f"{name}.json").write_text(io.dumps_report(_header(), body))
    if "csv" in cfg.formats and rows_key and body.get(rows_key):
        rows = body[rows_key]
        header = list(rows[0].keys())
        io.write_csv(out / f"{name}.csv", header, [[r.get(h) for h in header] for r in rows])


def _pmap(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# -- subcommands ------------------------------------------------------------------


def cmd_conductivity(args):
    cfg = _config(args)
    mat = cfg.material(args.material or "al")
    f = parse_quantity(args.f, "Hz")
    temps = parse_range(args.t, "K")
    gap_model = args.gap_model or cfg.gap_model
    rows = []
    for T in temps:
        try:
            c = complex_conductivity(mat, T, f, gap_model)
            rows.append([T, c.s1, c.s2, penetration_depth(mat, T, f, gap_model),
                         surface_resistance(mat, T, f, gap_model),
                         kinetic_inductance(mat, T, f, gap_model)])
        except DomainError as exc:
            log.warning("T = %g K: %s", T, exc)
            rows.append([T] + [math.nan] * 5)
    _emit_table(args, f"conductivity_{mat.name}",
                ["T", "s1", "s2", "lambda_m", "r_s_ohm", "l_k_h"], rows)
    return EXIT_OK


def _fit_one(path, cfg, overlay_dir):
    try:
        trace = io.read_trace(path)
    except io.ParseError as exc:
        return {"file": str(path), "error": f"parse: {exc}"}
    if "attenuation_db" not in io.read_sidecar(path):
        trace = type(trace)(trace.freqs, trace.values, trace.applied_power, cfg.attenuation_db,
                            trace.temperature, trace.label)
    try:
        fit = fit_s21(trace, max_iter=cfg.fit.max_iter, ftol=cfg.fit.ftol,
                      bootstrap=cfg.fit.bootstrap)
    except (FitInitError, FitConvergenceError, DomainError) as exc:
        return {"file": str(path), "error": f"fit: {exc}"}
    row = {"file": str(path), **fit.as_row(), "label": trace.label}
    if overlay_dir is not None:
        model = evaluate_s21(fit.params, trace.freqs)
        io.write_csv(overlay_dir / f"{Path(path).stem}_overlay.csv",
                     ["f", "data_re", "data_im", "model_re", "model_im"],
                     zip(trace.freqs, trace.values.real, trace.values.imag, model.real, model.imag))
    return row


def cmd_fit(args):
    cfg = _config(args)
    out = _out_dir(args, cfg)
    overlay = out if args.overlay else None
    results = _pmap(lambda p: _fit_one(p, cfg, overlay), args.traces, args.jobs)
    rows = [r for r in results if "error" not in r]
    errors = [r for r in results if "error" in r]
    for e in errors:
        log.error("%s: %s", e["file"], e["error"])
    body = {**_provenance(cfg, args.traces), "fits": rows, "errors": errors}
    _write_report(out, args.name or "fit_report", cfg, body, rows_key="fits")
    if rows or not results:
        return EXIT_OK
    return EXIT_USAGE if all(e["error"].startswith("parse") for e in errors) else EXIT_FAIL


def cmd_sweep(args):
    cfg = _config(args)
    out = _out_dir(args, cfg)
    if args.delta and not args.baseline:
        raise UsageError("--delta needs --baseline")
    try:
        sweeps = [io.read_sweep(p) for p in args.sweeps]
        baseline = io.read_sweep(args.baseline) if args.baseline else None
    except io.ParseError as exc:
        raise UsageError(str(exc)) from None
    axes = {s.axis for s in sweeps} | ({baseline.axis} if baseline else set())
    if len(axes) != 1:
        raise UsageError(f"mixed sweep axes {sorted(axes)}")
    axis = axes.pop()
    trace_mat = cfg.material(args.material or cfg.trace_material)
    bridge_mat = cfg.material(args.bridge_material or cfg.bridge_material)
    if cfg.fit.weighting == "uniform":
        sweeps = [dataclasses.replace(s, sigma=None) for s in sweeps]
    body = _provenance(cfg, list(args.sweeps) + ([args.baseline] if args.baseline else []))
    errors = []

    if axis == "photon_number":
        rows = []
        for path, s in zip(args.sweeps, sweeps):
            try:
                m = fit_power_sweep(s, cfg.fit.min_decades)
            except InsufficientDataError as exc:
                errors.append({"file": str(path), "error": str(exc)})
                continue
            rows.append({"file": str(path), "n_ab": s.n_ab, "q_tls0_inv": m.q_tls0_inv,
                         "n_c": m.n_c, "beta": m.beta, "q_const_inv": m.q_const_inv})
        body.update(power_fits=rows, errors=errors)
        _write_report(out, args.name or "sweep_report", cfg, body, rows_key="power_fits")
        return EXIT_OK if rows else EXIT_FAIL

    if args.delta:
        sweeps = [delta_qi(s, baseline) for s in sweeps]
        for path, s in zip(args.sweeps, sweeps):
            io.write_sweep(out / f"{Path(path).stem}_delta.csv", s)
    elif baseline is not None:
        sweeps = [baseline] + sweeps
        args.sweeps = [args.baseline] + list(args.sweeps)

    kw = dict(t_min=cfg.fit.t_min, gap_model=cfg.gap_model)
    fits = []
    if cfg.fit.shared_q_other or args.shared:
        try:
            fits = list(zip(args.sweeps, fit_participation_shared(sweeps, trace_mat, bridge_mat, **kw)))
        except InsufficientDataError as exc:
            errors.append({"file": "*", "error": str(exc)})
    else:
        for path, s in zip(args.sweeps, sweeps):
            try:
                fits.append((path, fit_participation(s, trace_mat, bridge_mat, **kw)))
            except (InsufficientDataError, DomainError) as exc:
                errors.append({"file": str(path), "error": str(exc)})
    rows = [{"file": str(p), **f.as_row()} for p, f in fits]
    if args.curves:
        for (path, fit), s in zip(fits, sweeps):
            t, q = predicted_curve(fit, s, trace_mat, bridge_mat, cfg.gap_model)
            io.write_csv(out / f"{Path(path).stem}_model.csv", ["T", "qi_inv_model"], zip(t, q))
    body.update(participation_fits=rows, errors=errors)
    _write_report(out, args.name or "sweep_report", cfg, body, rows_key="participation_fits")
    return EXIT_OK if rows else EXIT_FAIL


def cmd_predict(args):
    cfg = _config(args)
    ps = [float(v) for v in args.p.split(",")]
    if any(not 0.0 <= p <= 1.0 for p in ps):
        raise UsageError("p values must lie in [0, 1]")
    temps = parse_range(args.t, "K")
    geo = cfg.geometry
    f_r0 = parse_quantity(args.f_r0, "Hz") if args.f_r0 else geo.f_r0
    l_g = parse_quantity(args.l_g, "H") if args.l_g else geo.l_g
    film = cfg.material(args.material or cfg.trace_material)
    bridge = cfg.material(args.bridge_material or cfg.bridge_material)
    geom = ResonatorGeometry.calibrated(f_r0, l_g, film, bridge, geo.length, cfg.gap_model)
    rows = []
    warned = False
    for T in temps:
        for p in ps:
            try:
                shift = fractional_frequency_shift(geom, p, T, cfg.gap_model)
                q = composite_loss(CompositeLossModel(p), T, f_r0, film, bridge, cfg.gap_model)
            except DomainError:
                if not warned:
                    log.warning("T = %g K is at or above a critical temperature; rows marked nan", T)
                    warned = True
                shift = q = math.nan
            rows.append([T, p, shift, q])
    _emit_table(args, "predict", ["T", "p", "df_over_f0", "qi_inv"], rows)
    return EXIT_OK


def cmd_fields(args):
    cfg = _config(args)
    f = parse_quantity(args.f, "Hz") if args.f else None
    try:
        samples = io.read_fields(args.file, f_r=f)
    except io.ParseError as exc:
        raise UsageError(str(exc)) from None
    mat = cfg.material(args.material) if args.material else None
    T = parse_quantity(args.t, "K") if args.t else None
    try:
        rep = field_report(samples, mat, T, cfg.gap_model)
    except (IncompleteDataError, DomainError) as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    out = _out_dir(args, cfg)
    body = {**_provenance(cfg, [args.file]), "report": rep.as_dict()}
    _write_report(out, args.name or "field_report", cfg, body)
    if "csv" in cfg.formats:
        d = rep.as_dict()
        io.write_csv(out / f"{args.name or 'field_report'}.csv", list(d), [list(d.values())])
    return EXIT_OK


def cmd_synth(args):
    out = Path(args.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed
    kinds = ["trace", "temp-sweep", "power-sweep"] if args.kind == "suite" else [args.kind]
    if "trace" in kinds:
        noise = 0.01 if args.noise is None else args.noise
        for n, tr in synth.device_traces(noise=noise, seed=seed).items():
            io.write_trace(out / f"trace_nab{n}.csv", tr)
    if "temp-sweep" in kinds:
        noise = 0.02 if args.noise is None else args.noise
        for n, sw in synth.device_sweeps(noise=noise, seed=seed).items():
            io.write_sweep(out / f"tsweep_nab{n}.csv", sw)
    if "power-sweep" in kinds:
        noise = 0.01 if args.noise is None else args.noise
        sw = synth.power_sweep(noise=noise, rng=np.random.default_rng(seed))
        io.write_sweep(out / "psweep_nab35.csv", sw)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config (default: $BRIDGELOSS_CONFIG)")
    common.add_argument("--material", help="material preset or config entry")
    common.add_argument("--attenuation-db", type=float, default=None,
                        help="input-line attenuation in dB (default 70)")
    common.add_argument("--out-dir", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="bridgeloss", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version",
                   version=f"bridgeloss {__version__} ({kernels.BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("conductivity", parents=[common], help="Mattis-Bardeen table vs T")
    c.add_argument("--t", required=True, help="temperature or start:stop:step (K or mK)")
    c.add_argument("--f", required=True, help="frequency, e.g. 6.15e9 or 6.15GHz")
    c.add_argument("--gap-model", choices=("interpolation", "self_consistent", "constant"))
    c.set_defaults(func=cmd_conductivity)

    f = sub.add_parser("fit", parents=[common], help="fit S21 traces")
    f.add_argument("traces", nargs="+")
    f.add_argument("--overlay", action="store_true", help="write per-trace fit overlay CSV")
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--name", help="report base name")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("sweep", parents=[common], help="fit loss sweeps")
    s.add_argument("sweeps", nargs="+")
    s.add_argument("--baseline", help="bridge-free sweep")
    s.add_argument("--delta", action="store_true", help="subtract baseline before fitting")
    s.add_argument("--shared", action="store_true", help="share the constant loss across sweeps")
    s.add_argument("--curves", action="store_true", help="write model curves on the data grid")
    s.add_argument("--bridge-material")
    s.add_argument("--name", help="report base name")
    s.set_defaults(func=cmd_sweep)

    pr = sub.add_parser("predict", parents=[common], help="frequency shift and loss vs T")
    pr.add_argument("--p", default="0,0.006,0.02,0.034", help="comma-separated participations")
    pr.add_argument("--t", default="0.01:1.15:0.01")
    pr.add_argument("--f-r0")
    pr.add_argument("--l-g")
    pr.add_argument("--bridge-material")
    pr.set_defaults(func=cmd_predict)

    fl = sub.add_parser("fields", parents=[common], help="participation from field samples")
    fl.add_argument("file")
    fl.add_argument("--f", help="resonance frequency if not in the sidecar")
    fl.add_argument("--t", help="temperature for R_s-based loss (needs --material)")
    fl.add_argument("--name", help="report base name")
    fl.set_defaults(func=cmd_fields)

    sy = sub.add_parser("synth", parents=[common], help="write synthetic datasets")
    sy.add_argument("kind", choices=("trace", "temp-sweep", "power-sweep", "suite"))
    sy.add_argument("--noise", type=float, default=None)
    sy.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, UnitError, ConfigError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"bridgeloss {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, DomainError) as exc:
        print(f"bridgeloss {args.command}: analysis failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
