"""Command line entry point.

    supereig run --example 1 --element cr --levels 2-6 --k 1 --post rea,exp --format csv --out results/
    supereig mesh --domain l-shape --level 3 --out lshape3.txt

Errors are reported on stderr as a single JSON object
``{"error": <type>, "message": <text>}`` with a nonzero exit status.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .experiments import ExperimentError, example_config, parse_levels, run_experiment
from .mesh import DOMAIN_KINDS, build_domain, write_mesh


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser():
    p = _Parser(prog="supereig", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a benchmark convergence study")
    r.add_argument("--example", required=True, type=int, choices=(1, 2, 3, 4))
    r.add_argument("--element", default="cr",
                   help="comma separated subset of cr, ecr, p1 (default: cr)")
    r.add_argument("--levels", default=None,
                   help="'n' for levels 1..n, 'a-b' for a range or a comma list")
    r.add_argument("--k", type=int, default=None, help="number of eigenpairs to compute")
    r.add_argument("--post", default="rea,exp",
                   help="comma separated subset of rea, exp, p1star, cea ('' for none)")
    r.add_argument("--format", default="csv", choices=("csv", "json"))
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--export-matrices", action="store_true",
                   help="also write stiffness and mass matrices as 'i j value' text")

    m = sub.add_parser("mesh", help="write a benchmark mesh as text")
    m.add_argument("--domain", required=True, choices=DOMAIN_KINDS)
    m.add_argument("--level", type=int, default=1)
    m.add_argument("--out", required=True)
    return p


def _split(s):
    return tuple(x.strip() for x in s.split(",") if x.strip())


def _run(args):
    cfg = example_config(
        args.example,
        elements=[e.upper() for e in _split(args.element)],
        levels=None if args.levels is None else parse_levels(args.levels),
        k=args.k,
        post=_split(args.post),
    )
    cfg.export_matrices = args.export_matrices
    report = run_experiment(cfg, out_dir=args.out, fmt=args.format)
    summary = {"experiment": report["experiment"], "tables": len(report["tables"]), "out": args.out}
    if "truncated" in report:
        summary["truncated"] = report["truncated"]
    print(json.dumps(summary, sort_keys=True))
    return 0


def _mesh(args):
    t = build_domain(args.domain, args.level)
    write_mesh(t, args.out)
    print(json.dumps({"domain": args.domain, "level": args.level, "vertices": t.n_vertices,
                      "triangles": t.n_triangles, "out": args.out}, sort_keys=True))
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(json.dumps({"error": "UsageError", "message": str(exc)}), file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help and --version
        return 0 if exc.code in (0, None) else 2
    try:
        return _run(args) if args.command == "run" else _mesh(args)
    except (ExperimentError, ValueError, OSError, RuntimeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
