"""Command-line entry point: ``steinpa run | verify-identities | d1``.

Exit codes: 0 success (every applicable tracked bound dominates), 1 a bound
was violated or an oracle check failed, 2 invalid configuration or input,
3 simulation failure.
"""
import argparse
import json
import sys

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_SIMULATION = 0, 1, 2, 3


def _cmd_run(args):
    from . import config as config_mod
    from .report import report_render
    from .runner import SimulationError, run

    try:
        cfg = config_mod.load(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_CONFIG
    except config_mod.ConfigError as exc:
        for where, msg in exc.errors:
            print(f"config error at {where}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = config_mod.apply_overrides(cfg, quick=args.quick, seed=args.seed, out=args.out)
    out = cfg.get("output", {})

    def progress(rec):
        f = rec.fields
        bound = "n/a" if f["bound"] is None else f"{f['bound']:.4g}"
        print(f"{cfg['model']} {rec.grid_value}: d1={f['d1']:.4g}±{f['d1_se']:.2g} bound={bound} "
              f"dominates={f['dominates']} ({f['runtime_s']:.1f}s)", file=sys.stderr)

    try:
        report = run(cfg, progress=progress)
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    try:
        paths = report_render(report, out.get("dir", "out"), out.get("stem", cfg["model"]),
                              plot=out.get("plot", False))
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    if report.violations:
        print(f"bound violated at {report.grid_name} = {report.violations}", file=sys.stderr)
    return report.exit_code


def _cmd_verify(args):
    from ..bounds.oracles import run_all

    results = run_all()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


def _cmd_d1(args):
    from ..samples import read_samples
    from ..stats import d1_to_standard_normal, standardize

    try:
        sm = read_samples(args.samples)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read samples: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = []
    for j, name in enumerate(sm.columns):
        x = sm.column(j)
        try:
            z = x if args.raw else standardize(x).values
            est = d1_to_standard_normal(z, resamples=args.resamples, seed=args.seed)
        except ValueError as exc:
            print(f"error in column {name}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        out.append({"column": name, **est.to_dict()})
    print(json.dumps(out if len(out) > 1 else out[0], indent=2))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="steinpa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--quick", action="store_true", help="divide the replicate count by 10 (at least 30)")
    p_run.add_argument("--out", help="output directory (overrides output.dir)")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.set_defaults(func=_cmd_run)
    p_ver = sub.add_parser("verify-identities", help="run the closed-form oracle suite")
    p_ver.set_defaults(func=_cmd_verify)
    p_d1 = sub.add_parser("d1", help="Wasserstein-1 distance of each sample column to N(0,1)")
    p_d1.add_argument("samples", help="CSV or STEINPA-SAMPLES1 binary file")
    p_d1.add_argument("--raw", action="store_true", help="skip empirical standardisation")
    p_d1.add_argument("--resamples", type=int, default=200)
    p_d1.add_argument("--seed", type=int, default=0)
    p_d1.set_defaults(func=_cmd_d1)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
