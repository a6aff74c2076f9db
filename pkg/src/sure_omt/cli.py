"""Command-line interface: contingency-table analysis, simulation, plot data.

Input tables are CSV rows ``id,a,b,c,d`` processed strictly in file order
(the stream order is the file order).  All numeric output uses 17
significant digits so traces replay bit-faithfully.

Exit codes: 0 success with audits passing, 1 audit violation, 2 input or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

from .discrete import ContingencyTable2x2, fisher_two_sided
from .procedures import FWER_NAMES, PROCEDURE_NAMES, ProcedureConfig, \
    audit_fwer_budget, audit_mfdr_budget, make_procedure
from .simulate import SWEEP_AXES, ProcSpec, ScenarioConfig, run_sweep, run_trials
from .spending import parse_sequence_spec
from .evaluate import EvalReport
from .simulate import _report_from_outcomes

CONFIG_ENV_VAR = "SURE_OMT_CONFIG"


class InputError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _apply_overrides(config: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise InputError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return config


def _load_config(path: str | None, overrides: list[str]) -> dict:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        config = {}
    else:
        try:
            with open(path) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}")
    return _apply_overrides(config, overrides)


def _build_procedure(config: dict):
    name = config.get("procedure")
    if name not in PROCEDURE_NAMES:
        raise InputError(f"unknown or missing procedure name: {name!r}")
    is_fwer = name in FWER_NAMES
    rewarded = name.startswith("rho-")
    alpha = float(config.get("alpha", 0.2))
    lam = float(config.get("lambda", 0.0))
    w0 = config.get("w0")
    if is_fwer and w0 is not None:
        raise InputError("w0 applies to mFDR procedures only")
    if not is_fwer and w0 is None:
        raise InputError(f"{name} requires w0 in (0, alpha)")
    gamma_spec = config.get("gamma", {"family": "power", "q": 1.6})
    gp_spec = config.get("gamma_prime")
    if rewarded and gp_spec is None:
        raise InputError(f"{name} requires a gamma_prime spec")
    if not rewarded and gp_spec is not None:
        raise InputError("gamma_prime applies to rewarded procedures only")
    try:
        cfg = ProcedureConfig(
            alpha=alpha,
            gamma=parse_sequence_spec(gamma_spec),
            lam=lam,
            w0=None if w0 is None else float(w0),
            gamma_prime=parse_sequence_spec(gp_spec) if gp_spec else None,
        )
        return make_procedure(name, cfg), is_fwer
    except (ValueError, KeyError) as exc:
        raise InputError(str(exc))


def _read_tables(path: str, max_rows: int | None):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(str(exc))
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return
        if [h.strip() for h in header] != ["id", "a", "b", "c", "d"]:
            raise InputError(f"line 1: expected header id,a,b,c,d, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if max_rows is not None and lineno - 1 > max_rows:
                return
            if len(row) != 5:
                raise InputError(f"line {lineno}: expected 5 fields, got {len(row)}")
            try:
                cells = [int(v) for v in row[1:]]
            except ValueError:
                raise InputError(f"line {lineno}: non-integer cell count")
            if min(cells) < 0:
                raise InputError(f"line {lineno}: negative cell count")
            yield row[0], cells


def cmd_analyze(args) -> int:
    config = _load_config(args.config, args.set or [])
    proc, is_fwer = _build_procedure(config)
    max_rows = config.get("max_rows")
    with open(args.out_trace, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(["t", "id", "p", "alpha", "rho", "epsilon", "reject"])
        for row_id, (a, b, c, d) in _read_tables(args.input, max_rows):
            result = fisher_two_sided(ContingencyTable2x2(a, b, c, d))
            proc.emit_alpha()
            dec = proc.observe(result.p_value, result.null_bound)
            writer.writerow([dec.t, row_id, _fmt(dec.p), _fmt(dec.alpha),
                             _fmt(dec.rho), _fmt(dec.eps_part), int(dec.reject)])
    audit = audit_fwer_budget(proc) if is_fwer else audit_mfdr_budget(proc)
    summary = {
        "rows": proc.t,
        "discoveries": proc.r_count,
        "audit_ok": audit.ok,
        "audit_worst_excess": audit.worst_excess,
        "audit_worst_t": audit.worst_t,
    }
    text = json.dumps(summary, indent=2)
    if args.out_summary:
        with open(args.out_summary, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if audit.ok else 1


def _specs_from_config(config: dict) -> list[ProcSpec]:
    specs = []
    for entry in config.get("procedures", [{"name": "rho-ob"}, {"name": "rho-lord"}]):
        name = entry.get("name")
        if name not in PROCEDURE_NAMES:
            raise InputError(f"unknown procedure {name!r}")
        specs.append(ProcSpec(
            name=name,
            alpha=float(entry.get("alpha", 0.2)),
            lam=float(entry.get("lambda", 0.5)),
            w0=entry.get("w0"),
            q=float(entry.get("q", 1.6)),
            h=entry.get("h"),
        ))
    return specs


def cmd_simulate(args) -> int:
    config = _load_config(args.config, args.set or [])
    try:
        scenario = ScenarioConfig(**config.get("scenario", {}))
        specs = _specs_from_config(config)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc))
    sweep = config.get("sweep")
    if sweep:
        axis = sweep.get("axis")
        if axis not in SWEEP_AXES:
            raise InputError(f"unknown sweep axis {axis!r}")
        report = run_sweep(scenario, axis, sweep["values"], specs, audit=True)
    else:
        results = run_trials(scenario, specs, audit=True)
        report = EvalReport(audits_ok=results.audits_ok)
        _report_from_outcomes(report, results.outcomes, scenario.m)
    report.to_csv(args.out)
    if args.out_json:
        report.to_json(args.out_json)
    print(json.dumps({"rows": len(report.rows), "audits_ok": report.audits_ok}))
    return 0 if report.audits_ok else 1


def _loglog(y: float) -> str:
    # -log(-log(y)); values outside (0, 1) have no image on this scale
    if not 0.0 < y < 1.0:
        return ""
    return _fmt(-math.log(-math.log(y)))


def cmd_plotdata(args) -> int:
    transform = args.transform
    try:
        fh = open(args.trace, newline="")
    except OSError as exc:
        raise InputError(str(exc))
    with fh, open(args.out, "w", newline="") as out:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t", "p", "alpha"} <= set(reader.fieldnames):
            raise InputError("trace file must have t, p and alpha columns")
        writer = csv.writer(out)
        writer.writerow(["t", "series", "value"])
        for row in reader:
            for series in ("p", "alpha"):
                y = float(row[series])
                value = _fmt(y) if transform == "raw" else _loglog(y)
                writer.writerow([row["t"], series, value])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sure-omt",
        description="Online multiple testing with super-uniformity rewards.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run one procedure over a table CSV")
    pa.add_argument("--config", help=f"JSON config (default ${CONFIG_ENV_VAR})")
    pa.add_argument("--input", required=True, help="CSV with header id,a,b,c,d")
    pa.add_argument("--out-trace", required=True)
    pa.add_argument("--out-summary")
    pa.add_argument("--set", action="append", metavar="KEY=VALUE")
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("simulate", help="Monte-Carlo evaluation run")
    ps.add_argument("--config", help=f"JSON config (default ${CONFIG_ENV_VAR})")
    ps.add_argument("--out", required=True, help="report CSV path")
    ps.add_argument("--out-json")
    ps.add_argument("--set", action="append", metavar="KEY=VALUE")
    ps.set_defaults(func=cmd_simulate)

    pp = sub.add_parser("plotdata", help="trace to plot-ready long format")
    pp.add_argument("--trace", required=True)
    pp.add_argument("--transform", choices=("raw", "loglog"), default="raw")
    pp.add_argument("--out", required=True)
    pp.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
