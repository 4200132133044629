"""Command-line verification harness.

    idemgeo-verify --dim 3 --rank 1 --suite identities --format json --out report.json

Exit status: 0 when every check passes, 1 on a numeric failure, 2 on a
configuration error.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

from . import __version__
from .checks import SUITES, run_one
from .geometry import metric_scale
from .linalg import RNG_NAME, matrix_to_json
from .poisson import bracket_constant

SCHEMA_VERSION = "1.0"
SEED_ENV = "IDEMGEO_SEED"
DEFAULT_SEED = 20240917


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class SuiteConfig:
    dim: int = 3
    rank: int = 1
    trials: int = 100
    samples: int = 100_000
    seed: int = DEFAULT_SEED
    tol_scale: float = 1.0
    suites: tuple = field(default=SUITES)

    def __post_init__(self):
        if not 2 <= self.dim <= 16:
            raise ConfigError("dim", f"must be in 2..16, got {self.dim}")
        if not 1 <= self.rank <= self.dim - 1:
            raise ConfigError("rank", f"must be in 1..{self.dim - 1}, got {self.rank}")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if self.samples < 2:
            raise ConfigError("samples", "must be >= 2")
        if self.seed < 0:
            raise ConfigError("seed", "must be non-negative")
        if not (self.tol_scale > 0 and math.isfinite(self.tol_scale)):
            raise ConfigError("tol_scale", "must be a positive finite number")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigError("suite", f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
        if not self.suites:
            raise ConfigError("suite", "no suite selected")
        # canonical order makes reports independent of flag order
        object.__setattr__(self, "suites", tuple(sorted(set(self.suites))))

    def to_json(self):
        d = asdict(self)
        d["suites"] = list(self.suites)
        return d


def _run_named(args):
    cfg, suite = args
    return run_one(cfg, suite)


def run_suite(cfg, jobs=1):
    """Run the selected suites; returns the check records in suite order."""
    if jobs > 1 and len(cfg.suites) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_named, [(cfg, s) for s in cfg.suites]))
    else:
        results = [run_one(cfg, s) for s in cfg.suites]
    return [c for checks in results for c in checks]


def _real(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def build_report(cfg, checks):
    """JSON-ready report. Timings are left out so that it is reproducible."""
    records = [{
        "suite": c.suite,
        "name": c.name,
        "anchor": c.anchor,
        "max_residual": _real(c.max_residual),
        "tolerance": _real(c.tolerance),
        "passed": c.passed,
        "informational": c.informational,
    } for c in checks]
    graded = [c for c in checks if not c.informational]
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "idemgeo", "version": __version__},
        "config": cfg.to_json(),
        "calibration": {
            "metric_scale": metric_scale(),
            "bracket_constant": bracket_constant(),
            "rng": RNG_NAME,
        },
        "checks": records,
        "summary": {
            "total": len(graded),
            "passed": sum(c.passed for c in graded),
            "failed": sum(not c.passed for c in graded),
            "informational": len(checks) - len(graded),
        },
    }


def load_schema():
    return json.loads(resources.files("idemgeo").joinpath("report_schema.json").read_text())


def validate_report(report):
    import jsonschema

    jsonschema.validate(report, load_schema())


def render_json(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def render_text(report, checks=None):
    times = {(c.suite, c.name): c.seconds for c in checks or []}
    rows = []
    for r in report["checks"]:
        status = "info" if r["informational"] else ("PASS" if r["passed"] else "FAIL")
        res = r["max_residual"]
        res = f"{res:.3e}" if isinstance(res, float) else str(res)
        t = times.get((r["suite"], r["name"]))
        rows.append((status, r["suite"], r["name"], r["anchor"], res, f"{r['tolerance']:.1e}"
                     if isinstance(r["tolerance"], float) else str(r["tolerance"]),
                     "" if t is None else f"{t:.2f}s"))
    head = ("status", "suite", "check", "anchor", "residual", "tol", "time")
    widths = [max(len(str(x)) for x in col) for col in zip(head, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row).rstrip() for row in rows]
    s = report["summary"]
    cal = report["calibration"]
    lines.append("")
    lines.append(f"{s['passed']}/{s['total']} passed, {s['failed']} failed, {s['informational']} informational")
    lines.append(f"metric scale {cal['metric_scale']:g}, bracket constant {cal['bracket_constant']:g}, "
                 f"rng {cal['rng']}, seed {report['config']['seed']}")
    return "\n".join(lines) + "\n"


def emit(report, fmt="text", path=None, checks=None):
    text = render_json(report) if fmt == "json" else render_text(report, checks)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def dump_counterexamples(checks, path):
    out = []
    for c in checks:
        if c.passed or c.informational or not c.witness:
            continue
        out.append({"suite": c.suite, "name": c.name, "anchor": c.anchor,
                    "max_residual": _real(c.max_residual),
                    "inputs": {k: matrix_to_json(v) for k, v in sorted(c.witness.items())}})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return len(out)


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("seed", f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser():
    p = argparse.ArgumentParser(prog="idemgeo-verify", description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--trials", type=int, default=100, help="random samples per identity")
    p.add_argument("--samples", type=int, default=100_000, help="Monte-Carlo samples")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--tol-scale", type=float, default=1.0, help="multiply every residual tolerance")
    p.add_argument("--suite", action="append", choices=SUITES, help="repeatable; default all")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--jobs", type=int, default=1, help="run suites in parallel processes")
    p.add_argument("--dump-counterexample", metavar="PATH", default=None,
                   help="on failure, write the worst inputs as matrix JSON")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed = args.seed if args.seed is not None else _default_seed()
        cfg = SuiteConfig(dim=args.dim, rank=args.rank, trials=args.trials, samples=args.samples,
                          seed=seed, tol_scale=args.tol_scale, suites=tuple(args.suite or SUITES))
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"idemgeo-verify: error: {exc}", file=sys.stderr)
        return 2
    checks = run_suite(cfg, jobs=max(1, args.jobs))
    report = build_report(cfg, checks)
    try:
        emit(report, args.format, args.out, checks)
    except OSError as exc:
        print(f"idemgeo-verify: cannot write {args.out}: {exc}", file=sys.stderr)
        return 2
    failed = report["summary"]["failed"]
    if failed and args.dump_counterexample:
        dump_counterexamples(checks, args.dump_counterexample)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
