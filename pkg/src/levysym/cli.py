"""Command line: ``levysym run | suite | validate``.

Exit status is 0 when every verdict holds (or the run succeeds), 2 when some
inequality is violated or a triple is invalid, and 1 on errors such as a
malformed configuration.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .experiments import EXIT_CODES, ConfigError, run_experiment, run_many
from .scenarios import oracle_suite, standard_suite


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None


def _outputs(out, stem):
    if not out:
        return {}
    os.makedirs(out, exist_ok=True)
    return {"csv": os.path.join(out, "results.csv"), "json": os.path.join(out, f"{stem}.json")}


def _public(summary):
    return {k: v for k, v in summary.items() if not k.startswith("_")}


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.paths is not None:
        cfg.setdefault("sampler", {})["num_paths"] = args.paths
    return cfg


def cmd_run(args):
    cfg = _apply_overrides(_load(args.config), args)
    if args.out:
        cfg["output"] = _outputs(args.out, "summary")
    summary = run_experiment(cfg)
    print(json.dumps(_public(summary), indent=2, default=str))
    return summary["status"]


def cmd_validate(args):
    triple = _load(args.triple)
    cfg = {"experiment": "validate", "triple": triple,
           "seed": 0 if args.seed is None else args.seed}
    if args.out:
        cfg["output"] = _outputs(args.out, "validate")
    summary = run_experiment(cfg)
    rep = summary["report"]
    for c in rep["checks"]:
        print(f"{'ok  ' if c['passed'] else 'FAIL'} {c['name']}: {c['detail']}")
    for f in rep["flags"]:
        print(f"flag {f}")
    print(summary["verdict"])
    return summary["status"]


def cmd_suite(args):
    kinds = set(args.filter) if args.filter else None
    seed = 20240601 if args.seed is None else args.seed
    paths = 100_000 if args.paths is None else args.paths
    configs = standard_suite(seed, paths, n_jobs=args.jobs, kinds=kinds)
    if not args.no_oracles:
        configs += oracle_suite(seed, kinds)
    out = _outputs(args.out, "suite")
    csv_path = out.get("csv")

    def progress(s):
        print(f"{s['verdict']:12s} {s['experiment']}", flush=True)

    summaries = run_many(configs, csv_path, progress)
    if out:
        with open(out["json"], "w") as fh:
            json.dump([_public(s) for s in summaries], fh, indent=2, default=str)
    counts = {}
    for s in summaries:
        counts[s["verdict"]] = counts.get(s["verdict"], 0) + 1
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    if any(s["status"] == 1 for s in summaries):
        return 1
    return max((EXIT_CODES.get(s["verdict"], 1) for s in summaries), default=0)


def build_parser():
    p = argparse.ArgumentParser(prog="levysym",
                                description="Symmetrization inequalities for Levy processes")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None, help="override the seed")
        sp.add_argument("--paths", type=int, default=None, help="paths per side")
        sp.add_argument("--out", default=None, help="directory for results.csv and JSON")

    r = sub.add_parser("run", help="run one experiment configuration")
    r.add_argument("config")
    common(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("suite", help="run the standard verification suite")
    s.add_argument("--filter", action="append", metavar="KIND",
                   help="only experiments of this kind (repeatable)")
    s.add_argument("--jobs", type=int, default=1, help="worker threads per estimate")
    s.add_argument("--no-oracles", action="store_true", help="skip the deterministic oracles")
    common(s)
    s.set_defaults(func=cmd_suite)

    v = sub.add_parser("validate", help="validate a triple JSON file")
    v.add_argument("triple")
    common(v)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # reported, not traced, for the command line
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
