"""Command-line entry point (``s3comp``)."""
import argparse
import dataclasses
import os
import sys

from . import harness
from .dataset import SyntheticSpec, generate_synthetic, save_labels, save_matrix
from .exceptions import S3COMPError, StageError


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def _add_common(p):
    g = p.add_argument_group("experiment")
    g.add_argument("--config", help="INI-style key = value file; flags override it")
    g.add_argument("--method", help="sscomp, s3comp or s3comp_c (comma list for sweep-ni)")
    g.add_argument("--seed", type=int)
    g.add_argument("--trials", type=int)
    g.add_argument("--out", help="output directory")
    g.add_argument("--dump", action="store_const", const=True,
                   help="also write C, affinity, eigenvalues and per-cluster lambda_2")
    d = p.add_argument_group("data")
    d.add_argument("--data", help="matrix file (.csv or binary .bin/.s3m), columns are points")
    d.add_argument("--labels", help="labels file, one integer per line")
    d.add_argument("--n-clusters", type=int, help="cluster count when no labels are given")
    d.add_argument("--n", type=int, help="synthetic: number of subspaces")
    d.add_argument("--d", type=int, help="synthetic: subspace dimension")
    d.add_argument("--D", type=int, help="synthetic: ambient dimension")
    d.add_argument("--ni", dest="n_i", type=int, help="synthetic: points per subspace")
    c = p.add_argument_group("self-expression")
    c.add_argument("--s", type=int, help="sparsity per subproblem")
    c.add_argument("--delta", type=float, help="dropout rate")
    c.add_argument("--T", type=int, help="number of subproblems")
    c.add_argument("--lambda", dest="lam", type=float, help="consensus penalty")
    c.add_argument("--eps-inner", type=float)
    c.add_argument("--eps-outer", type=float)
    c.add_argument("--max-outer", type=int)
    c.add_argument("--averaging", choices=("mean", "star"))
    c.add_argument("--union-selection", action="store_const", const=True)
    c.add_argument("--presets", dest="presets", action="store_const", const=True,
                   help="sweeps: use tabulated (lambda, delta) per N_i (default)")
    c.add_argument("--no-presets", dest="presets", action="store_const", const=False)
    s = p.add_argument_group("spectral")
    s.add_argument("--k-eig", type=int, help="eigenvectors in the embedding (default n)")
    s.add_argument("--restarts", type=int, help="k-means restarts")
    s.add_argument("--n-eigenvalues", type=int, help="eigenvalues to report")


def build_parser():
    parser = argparse.ArgumentParser(prog="s3comp",
                                     description="Stochastic sparse subspace clustering.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a matrix file or one synthetic draw")
    _add_common(p)

    p = sub.add_parser("sweep-ni", help="accuracy/connectivity/time versus points per subspace")
    _add_common(p)
    p.add_argument("--ni-list", type=_ints, help="comma list of N_i values")
    p.add_argument("--full-range", action="store_true",
                   help="run N_i up to 3396 instead of the desk-scale cap of 320")

    p = sub.add_parser("grid-dt", help="dropout rate x subproblem count grid")
    _add_common(p)
    p.add_argument("--delta-list", type=_floats)
    p.add_argument("--T-list", type=_ints)

    p = sub.add_parser("trace", help="relative change of C per outer iteration")
    _add_common(p)

    p = sub.add_parser("plot", help="render SVG plots from CSV artifacts")
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", default="plots")

    p = sub.add_parser("synth", help="write a synthetic union-of-subspaces data set")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--d", type=int, default=6)
    p.add_argument("--D", type=int, default=9)
    p.add_argument("--ni", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="matrix path; .bin/.s3m selects binary")
    p.add_argument("--labels-out", help="labels path (default: <out stem>.labels)")
    return parser


def config_from_args(args):
    cfg = harness.ExperimentConfig()
    if getattr(args, "config", None):
        cfg = harness.load_config(args.config, cfg)
    names = {f.name for f in dataclasses.fields(cfg)}
    updates = {k: v for k, v in vars(args).items() if k in names and v is not None}
    if "method" in updates:
        updates["method"] = updates["method"].split(",")[0]
    return dataclasses.replace(cfg, **updates)


def _methods(args, cfg):
    if args.method:
        return tuple(m.strip() for m in args.method.split(",") if m.strip())
    return harness.METHODS


def _print_rows(rows, keys):
    for r in rows:
        print("  ".join(f"{k}={harness._fmt(r[k])}" for k in keys))


def run(args):
    if args.command == "synth":
        X, labels = generate_synthetic(SyntheticSpec(args.n, args.d, args.D, args.ni, args.seed))
        save_matrix(X, args.out)
        lab = args.labels_out or os.path.splitext(args.out)[0] + ".labels"
        save_labels(labels, lab)
        print(f"wrote {args.out} ({X.shape[0]}x{X.shape[1]}) and {lab}")
        return 0
    if args.command == "plot":
        for path in harness.emit_plots(args.csv, args.out):
            print(path)
        return 0

    cfg = config_from_args(args)
    if args.command == "cluster":
        for trial in range(cfg.trials):
            out = cfg.out if cfg.trials == 1 else os.path.join(cfg.out, f"trial{trial}")
            res = harness.run_once(cfg, trial, out_dir=out)
            _print_rows([res.row], ("method", "seed", "accuracy_pct", "sre_pct", "conn_min",
                                    "conn_mean", "nnz_per_col"))
    elif args.command == "sweep-ni":
        if args.ni_list:
            cfg = dataclasses.replace(cfg, ni_list=args.ni_list)
        elif args.full_range:
            cfg = dataclasses.replace(cfg, ni_list=harness.FULL_NI)
        rows = harness.run_sweep_ni(cfg, methods=_methods(args, cfg))
        _print_rows(harness.summarize(rows), ("method", "n_i", "mean_accuracy_pct",
                                              "mean_conn_min", "mean_wall_time_s"))
        if any(r["status"] != "ok" for r in rows):
            print("some trials failed; see the status column of sweep_ni.csv", file=sys.stderr)
            return 1
    elif args.command == "grid-dt":
        if args.delta_list:
            cfg = dataclasses.replace(cfg, delta_list=args.delta_list)
        if args.T_list:
            cfg = dataclasses.replace(cfg, T_list=args.T_list)
        mats = harness.run_grid_delta_t(cfg)
        for name, M in mats.items():
            print(f"{name}: {M.shape[0]}x{M.shape[1]} written")
    elif args.command == "trace":
        cfg = dataclasses.replace(cfg, method="s3comp_c")
        for trial, (trace, conv) in enumerate(harness.run_convergence_trace(cfg)):
            vals = " ".join(f"{v:.3g}" for v in trace)
            print(f"trial {trial} converged={conv}: {vals}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except StageError as exc:
        print(f"s3comp {args.command}: {exc}", file=sys.stderr)
        return 1
    except (S3COMPError, OSError, ValueError) as exc:
        print(f"s3comp {args.command}: [{args.command}] {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
