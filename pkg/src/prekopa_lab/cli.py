"""Command-line front end.

Exit status: 0 when every check passes, 2 when a certified violation is
found, 1 on execution or configuration errors. ``--expect-violation`` turns
a found violation into 0 and a clean run into 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import bergman, marginal, mep, smoothing
from . import weights as W
from .errors import ConfigError, PrekopaLabError
from .parallel import THREADS_ENV, resolve_workers
from .quadrature import disk_rule, write_rule_csv

SCHEMA = 1
COMMANDS = ("marginal", "prekopa-suite", "mep-sweep", "tube-check", "smoothing-audit",
            "mean-value")
EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2

CSV_HELP = """\
CSV columns per command:
  marginal         t, phi, second_diff, violation_flag
  prekopa-suite    weight, convex_flag, verdict, min_second_difference, violations, error
  mep-sweep        a_re, a_im, r, minimal_norm, bound, verdict
  tube-check       a_re, a_im, r, minimal_norm, bound, verdict
  mean-value       a_re, a_im, r, area_mean, value_at_center, jensen_lhs, log_mean
  smoothing-audit  R, n, a_R, lower, upper, ratio, cap, grad_sup, bound

Config files hold one dotted key = value per line ('#' starts a comment), e.g.
  command = mep-sweep
  weight.name = radial:minus-abs2
  disk.radii = 0.5, 1
Flags given on the command line override the file. Worker threads fall back
to the PREKOPA_LAB_THREADS environment variable.
"""


def _floats(text):
    return [float(v) for v in text.replace(" ", "").split(",") if v]


def _complexes(text):
    return [complex(v) for v in text.replace(" ", "").split(",") if v]


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# config key -> (RunConfig attribute, parser)
CONFIG_KEYS = {
    "command": ("command", str),
    "catalog": ("catalog", str),
    "grid.t0": ("t0", float),
    "grid.h": ("h", float),
    "grid.N": ("N", int),
    "disk.centers": ("centers", _complexes),
    "disk.radii": ("radii", _floats),
    "disk.a": ("a", complex),
    "disk.r": ("r", float),
    "degree": ("degree", int),
    "tol": ("tol", float),
    "output.dir": ("out", str),
    "threads": ("threads", int),
    "expect_violation": ("expect_violation", _bool),
    "smoothing.R": ("R", _floats),
    "smoothing.n": ("n", lambda s: [int(v) for v in _floats(s)]),
}


@dataclass
class RunConfig:
    command: str
    weight: Optional[str] = None
    weight_kv: dict = field(default_factory=dict)
    catalog: str = "all"
    t0: float = marginal.DEFAULT_T0
    h: float = marginal.DEFAULT_H
    N: int = marginal.DEFAULT_COUNT
    centers: Optional[list] = None
    radii: list = field(default_factory=lambda: list(mep.DEFAULT_RADII))
    a: complex = 0j
    r: float = 1.0
    degree: int = bergman.DEFAULT_DEGREE
    tol: float = marginal.CONVEXITY_TOL
    out: str = "reports"
    threads: int = 1
    expect_violation: bool = False
    R: list = field(default_factory=lambda: [100.0])
    n: list = field(default_factory=lambda: [1])
    dump_rule: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if not self.h > 0 or self.N < 3:
            raise ConfigError("grid needs h > 0 and N >= 3")
        if self.degree < 0 or not self.r > 0 or any(not r > 0 for r in self.radii):
            raise ConfigError("degree must be >= 0 and radii positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.catalog not in ("all", "convex", "nonconvex"):
            raise ConfigError(f"unknown catalog selector {self.catalog!r}")
        os.makedirs(self.out, exist_ok=True)
        if not os.access(self.out, os.W_OK):
            raise ConfigError(f"output directory {self.out!r} is not writable")

    def to_json(self) -> dict:
        out = asdict(self)
        out["a"] = [self.a.real, self.a.imag]
        if self.centers is not None:
            out["centers"] = [[c.real, c.imag] for c in self.centers]
        return out


def parse_config_text(text: str) -> dict:
    """Parse a key = value document into ``{attribute: value}`` plus weight keys."""
    values, weight_kv, seen = {}, {}, set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        seen.add(key)
        if key.startswith("weight."):
            weight_kv[key] = value
            continue
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        attr, conv = CONFIG_KEYS[key]
        try:
            values[attr] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line=lineno) from None
    if weight_kv:
        values["weight_kv"] = weight_kv
    return values


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2, which is reserved for certified violations
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="prekopa-lab", epilog=CSV_HELP,
                formatter_class=argparse.RawDescriptionHelpFormatter,
                description="Numerical certificates for L2-extension bounds, the minimal "
                            "extension property and Prekopa marginal convexity.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="key = value config document")
    p.add_argument("--weight", help="catalog name, const:<c> or harmonic:re")
    p.add_argument("--catalog", choices=("all", "convex", "nonconvex"))
    p.add_argument("--t0", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--centers", type=_complexes, help="comma-separated complex numbers")
    p.add_argument("--radii", type=_floats)
    p.add_argument("--a", type=complex)
    p.add_argument("--r", type=float)
    p.add_argument("--degree", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--R", type=_floats)
    p.add_argument("--n", type=lambda s: [int(v) for v in _floats(s)])
    p.add_argument("--out", help="report directory (default: reports)")
    p.add_argument("--threads", type=int, help=f"worker cap (fallback ${THREADS_ENV})")
    p.add_argument("--expect-violation", action="store_true", default=None)
    p.add_argument("--dump-rule", action="store_true", default=None,
                   help="also write the disk quadrature table as rule.csv")
    return p


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for attr in ("command", "weight", "catalog", "t0", "h", "N", "centers", "radii", "a", "r",
                 "degree", "tol", "R", "n", "out", "threads", "expect_violation", "dump_rule"):
        val = getattr(args, attr)
        if val is not None:
            values[attr] = val
    if "command" not in values:
        raise ConfigError("no command given")
    if "threads" not in values:
        try:
            values["threads"] = resolve_workers(None)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV}: {exc}") from None
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _weight_object(cfg: RunConfig):
    """Resolve the configured weight to a WeightSpec or PlanarWeight."""
    name = cfg.weight
    if name is None and cfg.weight_kv:
        if "weight.kind" not in cfg.weight_kv and "weight.name" in cfg.weight_kv:
            name = cfg.weight_kv["weight.name"]
        else:
            return W.from_kv(cfg.weight_kv)
    if name is None:
        raise ConfigError("this command needs a weight")
    if name.startswith("const:"):
        return W.constant_weight(float(name.split(":", 1)[1]))
    if name == "harmonic:re":
        return W.real_part_weight()
    return W.lookup(name)


def _planar(obj):
    if isinstance(obj, W.PlanarWeight):
        return obj
    if obj.is_planar:
        return W.planar_weight(obj)
    return marginal.marginal_lift(obj)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _csv_row(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for row in rows:
            out.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _run_marginal(cfg, out):
    spec = _weight_object(cfg)
    grid = marginal.marginal_grid(spec, cfg.t0, cfg.h, cfg.N, workers=cfg.threads)
    report = marginal.convexity_check(grid, cfg.tol)
    marginal.write_grid_csv(os.path.join(out, "marginal.csv"), grid, report)
    result = {"weight": spec.name, "report": report.to_dict(), "phi": list(grid.phi_values)}
    return (not report.convex), result


def _run_suite(cfg, out):
    specs = [s for s in W.catalog() if not s.is_planar]
    if cfg.catalog != "all":
        specs = [s for s in specs if s.convex_flag == cfg.catalog]
    entries = marginal.prekopa_suite(specs, cfg.t0, cfg.h, cfg.N, cfg.tol, workers=cfg.threads)
    rows, reports = [], []
    for e in entries:
        rep = e.report
        rows.append([e.name, e.convex_flag, rep.verdict if rep else "error",
                     rep.min_second_difference if rep else "", len(rep.violations) if rep else "",
                     e.error or ""])
        reports.append({"weight": e.name, "convex_flag": e.convex_flag,
                        "report": rep.to_dict() if rep else None, "error": e.error})
    _csv_row(os.path.join(out, "prekopa-suite.csv"),
             ["weight", "convex_flag", "verdict", "min_second_difference", "violations", "error"],
             rows)
    errors = [e for e in entries if e.error]
    if errors:
        raise PrekopaLabError(f"{len(errors)} suite entries failed: {errors[0].error}")
    violated = [e.name for e in entries if not e.report.convex]
    return bool(violated), {"entries": reports, "violated": violated}


def _run_sweep(cfg, out):
    weight = _planar(_weight_object(cfg))
    centers = cfg.centers if cfg.centers is not None else mep.default_centers()
    sweep = mep.mep_sweep(weight, centers, cfg.radii, cfg.degree, workers=cfg.threads)
    mep.write_sweep_csv(os.path.join(out, "mep-sweep.csv"),
                        [c for _, _, c in sweep.cells() if c is not None])
    if cfg.dump_rule and centers and cfg.radii:
        rule = disk_rule(centers[0], cfg.radii[0])
        write_rule_csv(os.path.join(out, "rule.csv"), rule.nodes, rule.weights)
    if any(not why.startswith("minimal_norm") for _, _, why in sweep.violations):
        raise PrekopaLabError("sweep cells failed to execute: "
                              + "; ".join(why for _, _, why in sweep.violations))
    return sweep.overall != "all-pass", sweep.to_dict()


def _run_tube(cfg, out):
    spec = _weight_object(cfg)
    if isinstance(spec, W.PlanarWeight) or spec.is_planar:
        raise ConfigError("tube-check needs a tube weight")
    cert = mep.tube_certificate(spec, cfg.a, cfg.r, cfg.degree)
    mep.write_sweep_csv(os.path.join(out, "tube-check.csv"), [cert])
    if cfg.dump_rule:
        rule = disk_rule(cfg.a, cfg.r)
        write_rule_csv(os.path.join(out, "rule.csv"), rule.nodes, rule.weights)
    return not cert.passed, {"certificate": cert.to_dict()}


def _run_mean_value(cfg, out):
    weight = _planar(_weight_object(cfg))
    cert = mep.mep_check(weight, cfg.a, cfg.r, cfg.degree)
    if not cert.passed:
        return True, {"certificate": cert.to_dict(), "report": None}
    rep = mep.mean_value_check(weight, cert)
    _csv_row(os.path.join(out, "mean-value.csv"),
             ["a_re", "a_im", "r", "area_mean", "value_at_center", "jensen_lhs", "log_mean"],
             [[rep.center.real, rep.center.imag, rep.radius, rep.area_mean,
               rep.value_at_center, rep.jensen_lhs, rep.log_mean]])
    return False, {"certificate": cert.to_dict(), "report": rep.to_dict()}


def _run_smoothing(cfg, out):
    records, failures = [], []
    for R in cfg.R:
        for n in cfg.n:
            try:
                records.append(smoothing.constants_audit(R, n))
            except smoothing.AuditError as exc:
                failures.append(f"R={R}, n={n}: {exc}")
    smoothing.write_audit_csv(os.path.join(out, "smoothing-audit.csv"), records)
    return bool(failures), {"records": [r.to_dict() for r in records], "failures": failures}


RUNNERS = {
    "marginal": _run_marginal,
    "prekopa-suite": _run_suite,
    "mep-sweep": _run_sweep,
    "tube-check": _run_tube,
    "mean-value": _run_mean_value,
    "smoothing-audit": _run_smoothing,
}


def run(cfg: RunConfig) -> int:
    violated, result = RUNNERS[cfg.command](cfg, cfg.out)
    if cfg.expect_violation:
        code = EXIT_OK if violated else EXIT_VIOLATION
    else:
        code = EXIT_VIOLATION if violated else EXIT_OK
    _write_json(os.path.join(cfg.out, "summary.json"), {
        "schema": SCHEMA,
        "command": cfg.command,
        "config": cfg.to_json(),
        "violation_found": violated,
        "exit_code": code,
        "result": result,
    })
    return code


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        return run(cfg)
    except ConfigError as exc:
        print(f"prekopa-lab: config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except PrekopaLabError as exc:
        print(f"prekopa-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
