"""Command-line interface.

Subcommands cover every workflow: power/sample-size arithmetic, effect sizes
for a synthetic design, scenario simulation, pilot analysis, and the HTTP
service.  Exit codes: 0 success, 1 domain error, 2 usage error.  Every
randomized command either receives --seed or generates one and prints it.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .datagen import CovariateDesign
from .distributions import RngStream, ncp_for_power
from .effectsize import CovariateSample, effect_size_report
from .errors import QLPowerError
from .model import ModelSpec
from .planner import DEFAULT_DELTA_GRID, PilotMapping, load_pilot_csv, pilot_analyze
from .power import power_at, sample_size
from .simharness import SimScenario, preset_by_name, run_scenario, scenario_presets

__all__ = ["main", "build_parser"]


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload))
    else:
        keys = list(payload)
        print(",".join(keys))
        print(",".join(repr(payload[k]) if isinstance(payload[k], float) else str(payload[k]) for k in keys))


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbelow(2**63)
    print(f"seed={seed}", file=sys.stderr)
    return seed


def _effect_f2(args, parser) -> tuple[float, dict]:
    """Resolve the single effect-size input form to an f2 value."""
    given = [name for name, v in (("f2", args.f2), ("phi", args.phi), ("r2", args.r2)) if v is not None]
    if len(given) != 1:
        parser.error("exactly one of --f2, --phi (with --w-one), or --r2 is required")
    if args.f2 is not None:
        return args.f2, {"f2": args.f2}
    if args.phi is not None:
        if args.w_one is None:
            parser.error("--phi requires --w-one")
        f2 = args.w_one * args.phi**2 / 4.0
        return f2, {"phi": args.phi, "w_one": args.w_one, "f2_phi": f2}
    if not 0.0 <= args.r2 < 1.0:
        raise QLPowerError(f"--r2 must lie in [0, 1), got {args.r2}")
    f2 = args.r2 / (1.0 - args.r2)
    return f2, {"r2": args.r2, "f2_r": f2}


def cmd_power(args, parser) -> int:
    f2, echo = _effect_f2(args, parser)
    if (args.power is None) == (args.n is None):
        parser.error("exactly one of --power or --n is required")
    out = dict(echo)
    out["df"] = args.df
    out["alpha"] = args.alpha
    if args.power is not None:
        n = sample_size(f2, args.df, args.alpha, args.power)
        out["target_power"] = args.power
        out["delta"] = ncp_for_power(args.df, args.alpha, args.power)
        out["n"] = n
    else:
        out["n"] = args.n
        out["delta"] = args.n * f2
        out["power"] = power_at(f2, args.n, args.df, args.alpha)
    _emit(out, args.format)
    return 0


def cmd_effectsize(args, parser) -> int:
    model = ModelSpec.from_dict(json.loads(Path(args.model).read_text()))
    design_doc = json.loads(Path(args.design).read_text())
    design = CovariateDesign(rho=float(design_doc["rho"]))
    seed = _resolve_seed(args)
    sample = CovariateSample.from_design(design, args.mc, RngStream(seed, 0))
    report = effect_size_report(model, sample, include_score=args.score)
    out = report.to_dict()
    out["seed"] = seed
    _emit(out, args.format)
    return 0


def cmd_simulate(args, parser) -> int:
    if (args.scenario is None) == (args.preset is None):
        parser.error("exactly one of --scenario or --preset is required")
    if args.preset is not None:
        scenario = preset_by_name(args.preset)
    else:
        scenario = SimScenario.from_dict(json.loads(Path(args.scenario).read_text()))
    overrides = {}
    if args.replicates is not None:
        overrides["replicates"] = args.replicates
    if args.seed is not None:
        overrides["seed"] = args.seed
    else:
        overrides["seed"] = _resolve_seed(args)
    scenario = replace(scenario, **overrides)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_scenario(scenario, threads=args.threads)
    csv_path = out_dir / f"{scenario.name}.csv"
    csv_path.write_text(result.to_csv())
    print(str(csv_path))
    return 0


def cmd_presets(args, parser) -> int:
    for scenario in scenario_presets():
        print(f"{scenario.name}\t{scenario.label}")
    return 0


def cmd_pilot(args, parser) -> int:
    mapping = PilotMapping.from_dict(json.loads(Path(args.mapping).read_text()))
    data, info = load_pilot_csv(Path(args.data).read_text(), mapping)
    lo, hi = args.delta_range
    if not lo < hi:
        parser.error("--delta-range needs LO < HI")
    grid = tuple(np.round(np.linspace(lo, hi, args.delta_points), 10))
    report = pilot_analyze(
        data, mapping.link, mapping.variance,
        alpha=args.alpha, target_power=args.power, delta_grid=grid,
    )
    out = report.to_dict()
    out["ingest"] = info
    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "pilot_report.json").write_text(json.dumps(out, indent=2))
        (out_dir / "delta_curve.csv").write_text(report.curve_csv())
        print(str(out_dir / "pilot_report.json"))
        print(str(out_dir / "delta_curve.csv"))
    else:
        print(json.dumps(out))
    return 0


def cmd_serve(args, parser) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(max_replicates=args.max_replicates)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlpower",
        description="Power and sample size engine for quasi-likelihood regression models.",
    )
    parser.add_argument("--version", action="version", version=f"qlpower {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (printed if generated)")
        p.add_argument("--threads", type=int, default=1, help="worker cap for parallel internals")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("power", help="convert effect size to sample size or power")
    common(p)
    p.add_argument("--f2", type=float, default=None, help="effect size f2 directly")
    p.add_argument("--phi", type=float, default=None, help="2SLiP contrast (needs --w-one)")
    p.add_argument("--w-one", type=float, default=None, dest="w_one", help="weight at the marginal mean")
    p.add_argument("--r2", type=float, default=None, help="pseudo-partial R-squared")
    p.add_argument("--df", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--power", type=float, default=None, help="target power (solves for n)")
    p.add_argument("--n", type=int, default=None, help="sample size (solves for power)")
    p.set_defaults(run=cmd_power)

    p = sub.add_parser("effectsize", help="Monte Carlo effect sizes for a synthetic design")
    common(p)
    p.add_argument("--model", required=True, help="model JSON (link, variance, sigma2, lambda, beta)")
    p.add_argument("--design", required=True, help="design JSON ({\"rho\": ...})")
    p.add_argument("--mc", type=int, default=10**6, help="Monte Carlo size")
    p.add_argument("--score", action="store_true", help="include the score-test effect f2_s")
    p.set_defaults(run=cmd_effectsize)

    p = sub.add_parser("simulate", help="run a calibration scenario, emit CSV")
    common(p)
    p.add_argument("--scenario", default=None, help="scenario JSON file")
    p.add_argument("--preset", default=None, help="preset name (see `qlpower presets`)")
    p.add_argument("--replicates", type=int, default=None, help="override replicate count")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(run=cmd_simulate)

    p = sub.add_parser("presets", help="list scenario presets")
    common(p)
    p.set_defaults(run=cmd_presets)

    p = sub.add_parser("pilot", help="pilot-study analysis with delta-scaled sample size curve")
    common(p)
    p.add_argument("--data", required=True, help="pilot CSV file")
    p.add_argument("--mapping", required=True, help="column mapping JSON file")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--power", type=float, default=0.8)
    p.add_argument("--delta-range", type=float, nargs=2, default=(0.5, 1.5), metavar=("LO", "HI"))
    p.add_argument("--delta-points", type=int, default=len(DEFAULT_DELTA_GRID))
    p.add_argument("--out", default=None, help="directory for report JSON + curve CSV")
    p.set_defaults(run=cmd_pilot)

    p = sub.add_parser("serve", help="serve the HTTP API")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8707)
    p.add_argument("--max-replicates", type=int, default=2000, dest="max_replicates")
    p.set_defaults(run=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args, parser)
    except QLPowerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
