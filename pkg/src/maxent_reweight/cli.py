"""Command-line entry point.

Exit codes: 0 diagnostics passed, 1 error, 2 diagnostics failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, demo_config, load_config, parse_config
from .oracle import OracleError
from .pipeline import run_oracle, run_transform, write_artifacts, write_oracle

log = logging.getLogger("maxent_reweight")

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


def _run_options(p: argparse.ArgumentParser):
    p.add_argument("--out-dir", help="directory for the artifacts (overrides output_dir)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--n-samples", type=int, help="override the config sample count")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for sampling; results do not depend on it")
    p.add_argument("--estimator", choices=["histogram", "kde"],
                   help="override the induced-density estimator")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxent-reweight",
        description="Reweight a base distribution so a derived parameter follows a target distribution.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", help="run a JSON-configured transform")
    t.add_argument("--config", required=True, help="path to the JSON run config")
    _run_options(t)

    d = sub.add_parser("demo", help="run a built-in demo")
    d.add_argument("name", choices=["triangular", "neutrino"])
    _run_options(d)

    o = sub.add_parser("oracle", help="grid-quadrature density table (dimension <= 3)")
    o.add_argument("--config", help="JSON config (base, derived, optional target and oracle block)")
    o.add_argument("--demo", choices=["triangular", "neutrino"], help="use a demo config")
    o.add_argument("--points", type=int, help="grid points per dimension")
    o.add_argument("--f-bins", type=int, help="number of f bins")
    o.add_argument("--out-dir", help="output directory")
    return parser


def _apply_overrides(obj: dict, args) -> dict:
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.n_samples is not None:
        obj["n_samples"] = args.n_samples
    if args.estimator is not None:
        obj["estimator"] = {"kind": args.estimator}
    if args.out_dir is not None:
        obj["output_dir"] = args.out_dir
    return obj


def _load_raw(path: str) -> dict:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as err:
        raise ConfigError("", f"cannot read config {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError("", f"invalid JSON in {path}: {err}") from None
    if not isinstance(obj, dict):
        raise ConfigError("", "config must be a JSON object")
    return obj


def _transform(obj: dict, args) -> int:
    config = parse_config(_apply_overrides(obj, args))
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads", "must be >= 1")
    result = run_transform(config, threads=args.threads)
    out = write_artifacts(result, config.output_dir)
    rep = result.report()
    print(f"wrote {out}/weighted_samples.csv, density_table.csv, report.json")
    print(f"n={rep['n']} ess={rep['ess']:.1f} entropy={rep['entropy']:.6f} "
          f"normalization_mc={rep['normalization_mc']:.6f} "
          f"clipped_fraction={rep['clipped_fraction']:.3g}")
    if rep["ks_statistic"] is not None:
        print(f"weighted KS={rep['ks_statistic']:.5f} threshold={rep['ks_threshold']:.5f}")
    for w in rep["warnings"]:
        print(w, file=sys.stderr)
    print("diagnostics:", "PASS" if result.passed else "FAIL")
    return EXIT_OK if result.passed else EXIT_FAILED


def _oracle(args) -> int:
    if (args.config is None) == (args.demo is None):
        raise ConfigError("", "oracle needs exactly one of --config or --demo")
    obj = demo_config(args.demo) if args.demo else _load_raw(args.config)
    obj.setdefault("oracle", {})
    if args.points is not None:
        obj["oracle"]["points"] = args.points
    if args.f_bins is not None:
        obj["oracle"]["f_bins"] = args.f_bins
    config = parse_config(obj, require_run=False)
    out_dir = args.out_dir or obj.get("output_dir", "out")
    path = write_oracle(run_oracle(config), out_dir)
    print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "transform":
            return _transform(_load_raw(args.config), args)
        if args.command == "demo":
            return _transform(demo_config(args.name), args)
        return _oracle(args)
    except ConfigError as err:
        print(f"error: config: {err}", file=sys.stderr)
    except OracleError as err:
        print(f"error: oracle: {err}", file=sys.stderr)
    except ValueError as err:
        origin = type(err).__module__.rsplit(".", 1)[-1]
        print(f"error: {origin}: {err}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
