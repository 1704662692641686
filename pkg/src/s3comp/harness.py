"""Experiment harness: seeded runs, synthetic sweeps, CSV artifacts and plots.

Every CSV written here starts with a ``schema`` column naming a versioned
layout (see ``docs/csv_schemas.md``).  Report rows hold only deterministic
quantities so that a repeated run reproduces them byte for byte; wall-clock
times go to separate ``timings`` files.
"""
import configparser
import csv
import dataclasses
import os
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._rng import stream_int
from .consensus import ConsensusParams, consensus_matrix, sample_dropout_masks
from .dataset import (SyntheticSpec, check_data_matrix, generate_synthetic, load_labels,
                      load_matrix, normalize_columns, save_labels)
from .exceptions import InvalidSpecError, LengthMismatchError, SchemaError, StageError
from .metrics import evaluate
from .omp import sscomp_matrix
from .spectral import affinity_from_coefficients, eigen_gap_report, spectral_cluster

METHODS = ("sscomp", "s3comp", "s3comp_c")

SCHEMA_REPORT = "s3comp.report.v1"
SCHEMA_TIMINGS = "s3comp.timings.v1"
SCHEMA_SWEEP = "s3comp.sweep.v1"
SCHEMA_SUMMARY = "s3comp.summary.v1"
SCHEMA_GRID = "s3comp.grid.v1"
SCHEMA_MATRIX = "s3comp.gridmatrix.v1"
SCHEMA_TRACE = "s3comp.trace.v1"
SCHEMA_EIGEN = "s3comp.eigenvalues.v1"
SCHEMA_LAMBDA2 = "s3comp.lambda2.v1"

# (lambda, delta) per points-per-subspace on the synthetic benchmark
SYNTHETIC_PRESETS = {
    30: (0.40, 0.30), 55: (0.40, 0.30), 98: (0.70, 0.30), 177: (0.70, 0.40),
    320: (0.70, 0.40), 577: (1.00, 0.60), 1041: (1.00, 0.60), 1880: (1.00, 0.60),
    3396: (1.00, 0.60),
}
# (lambda, delta, s) for the real benchmarks; not runnable here without features
REAL_DATA_PRESETS = {
    "EYaleB": (0.01, 0.10, 5), "COIL100": (0.60, 0.10, 3), "MNIST4000": (0.10, 0.10, 10),
    "MNIST10000": (1.00, 0.60, 10), "MNIST70000": (0.80, 0.80, 10), "GTSRB": (0.80, 0.80, 3),
}
DESK_NI = (30, 55, 98, 177, 320)
FULL_NI = DESK_NI + (577, 1041, 1880, 3396)
GRID_DELTAS = tuple(round(0.1 * k, 1) for k in range(1, 10))
GRID_TS = tuple(range(5, 101, 5))


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one run; mirrors the config file and CLI."""

    method: str = "s3comp_c"
    # synthetic data
    n: int = 5
    d: int = 6
    D: int = 9
    n_i: int = 30
    # file data (overrides synthetic when set)
    data: str = ""
    labels: str = ""
    n_clusters: int = 0
    # self-expression
    s: int = 5
    delta: float = 0.3
    T: int = 15
    lam: float = 0.4
    eps_inner: float = 1e-6
    eps_outer: float = 1e-3
    max_outer: int = 10
    averaging: str = "mean"
    union_selection: bool = False
    # spectral
    k_eig: int = 0  # 0 means n_clusters
    restarts: int = 20
    n_eigenvalues: int = 15
    # run control
    seed: int = 0
    trials: int = 1
    out: str = "s3comp_out"
    dump: bool = False
    presets: bool = True
    ni_list: tuple = DESK_NI
    delta_list: tuple = GRID_DELTAS
    T_list: tuple = GRID_TS

    def validate(self):
        if self.method not in METHODS:
            raise InvalidSpecError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.trials < 1:
            raise InvalidSpecError("trials must be >= 1")
        if self.data:
            for path in (self.data, self.labels):
                if path and not os.path.exists(path):
                    raise InvalidSpecError(f"file not found: {path}")
            if not self.labels and self.n_clusters < 1:
                raise InvalidSpecError("file data needs a labels file or n_clusters")
        else:
            SyntheticSpec(self.n, self.d, self.D, self.n_i, self.seed).validate()
        if self.method != "sscomp":
            self.consensus_params().validate()
            if not 0.0 <= self.delta < 1.0:
                raise InvalidSpecError(f"delta must be in [0, 1), got {self.delta}")
            if self.T < 1:
                raise InvalidSpecError("T must be >= 1")
        if self.k_eig < 0:
            raise InvalidSpecError("k_eig must be >= 0")
        return self

    def consensus_params(self):
        return ConsensusParams(
            s=self.s, lam=self.lam, eps_inner=self.eps_inner, eps_outer=self.eps_outer,
            max_outer=1 if self.method == "s3comp" else self.max_outer,
            averaging=self.averaging, union_selection=self.union_selection,
        )

    def with_presets(self, n_i):
        """Copy for ``n_i`` points per subspace, with tabulated (lambda, delta) if known."""
        cfg = dataclasses.replace(self, n_i=int(n_i))
        if self.presets and int(n_i) in SYNTHETIC_PRESETS:
            cfg.lam, cfg.delta = SYNTHETIC_PRESETS[int(n_i)]
        return cfg


# ----------------------------------------------------------------------------- config files

_CONFIG_KEYS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_ALIASES = {"lambda": "lam", "ni": "n_i", "k-eig": "k_eig"}


def _coerce(name, text):
    default = _CONFIG_KEYS[name].default
    text = text.strip()
    if isinstance(default, bool):
        low = text.lower()
        if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
            raise InvalidSpecError(f"{name}: expected a boolean, got {text!r}")
        return low in ("1", "true", "yes", "on")
    if isinstance(default, tuple):
        kind = float if name == "delta_list" else int
        return tuple(kind(v) for v in text.replace(",", " ").split())
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def normalize_key(key):
    # case matters for D (ambient dim) vs d (subspace dim); T is accepted as t too
    key = key.strip().replace("-", "_")
    if key in _CONFIG_KEYS:
        return key
    low = key.lower()
    if low in ("t", "t_list"):
        return "T" + low[1:]
    return _ALIASES.get(low, low)


def load_config(path, base=None):
    """Read an INI-style ``key = value`` file into an :class:`ExperimentConfig`.

    Section names are free-form (``[data]``, ``[consensus]``, ``[sweep.ni]`` ...)
    and only group keys; every key must be a field of ``ExperimentConfig``.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    with open(path) as fh:
        parser.read_file(fh)
    values = {}
    for section in parser.sections():
        for key, text in parser.items(section):
            name = normalize_key(key)
            if name not in _CONFIG_KEYS:
                raise InvalidSpecError(f"[{section}] unknown key {key!r}")
            values[name] = _coerce(name, text)
    return dataclasses.replace(base or ExperimentConfig(), **values)


def dump_config(cfg, path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser["experiment"] = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        parser["experiment"][f.name] = " ".join(map(str, v)) if isinstance(v, tuple) else str(v)
    with open(path, "w") as fh:
        parser.write(fh)


# ----------------------------------------------------------------------------- CSV helpers

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    """Write rows atomically (temp file + rename)."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[h]) for h in header])
    os.replace(tmp, path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ----------------------------------------------------------------------------- single run

PARAM_FIELDS = ("method", "n", "d", "D", "n_i", "data", "labels", "s", "delta", "T", "lam",
                "eps_inner", "eps_outer", "max_outer", "averaging", "union_selection", "k_eig",
                "restarts", "seed", "trial")
RESULT_FIELDS = ("N", "n_clusters", "accuracy_pct", "sre_pct", "conn_min", "conn_mean",
                 "nnz", "nnz_per_col", "max_outer_iter", "converged_frac", "empty_subproblems",
                 "singleton_clusters", "eig_gap")
REPORT_HEADER = ("schema",) + PARAM_FIELDS + RESULT_FIELDS
TIMING_FIELDS = ("self_expression_s", "spectral_s", "metrics_s", "total_s")
TIMINGS_HEADER = ("schema", "method", "n_i", "seed", "trial") + TIMING_FIELDS


@dataclass
class RunResult:
    """Outcome of :func:`run_once`."""

    row: dict
    timings: dict
    report: object  # ClusteringReport or None without ground truth
    labels: np.ndarray
    truth: np.ndarray
    C: object
    A: object
    eigenvalues: np.ndarray
    trace: list = field(default_factory=list)
    converged: bool = True


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with stage context
        raise StageError(name, exc) from exc


def trial_seed(cfg, trial):
    return cfg.seed + trial


def load_data(cfg, seed):
    """Data matrix (normalized, D x N) and labels (``None`` if unknown)."""
    if cfg.data:
        X = normalize_columns(check_data_matrix(load_matrix(cfg.data)))
        truth = load_labels(cfg.labels) if cfg.labels else None
        if truth is not None and truth.size != X.shape[1]:
            raise LengthMismatchError(f"{truth.size} labels for {X.shape[1]} points")
        return X, truth
    spec = SyntheticSpec(cfg.n, cfg.d, cfg.D, cfg.n_i, seed)
    return generate_synthetic(spec)


def self_expression(X, cfg, seed):
    """Coefficient matrix for ``cfg.method`` plus consensus diagnostics."""
    if cfg.method == "sscomp":
        return sscomp_matrix(X, cfg.s, cfg.eps_inner), None
    plan = sample_dropout_masks(X.shape[1], cfg.delta, cfg.T, seed=seed)
    res = consensus_matrix(X, plan, cfg.consensus_params())
    return res.C, res


def run_once(cfg, trial=0, out_dir=None, write=True):
    """Full pipeline for one seed: data, self-expression, spectral clustering, metrics.

    Writes ``report.csv``, ``timings.csv`` and ``labels.txt`` into ``out_dir``
    (default ``cfg.out``) when ``write`` is true; with ``cfg.dump`` also the
    coefficient and affinity matrices, eigenvalues and per-cluster lambda_2.
    Failures are raised as :class:`StageError` tagged with the stage name.
    """
    _stage("config", cfg.validate)
    seed = trial_seed(cfg, trial)
    t_start = time.perf_counter()
    X, truth = _stage("data", load_data, cfg, seed)
    N = X.shape[1]
    n_clusters = int(truth.max()) + 1 if truth is not None else cfg.n_clusters

    t0 = time.perf_counter()
    C, res = _stage("self-expression", self_expression, X, cfg, seed)
    t1 = time.perf_counter()

    def spectral():
        A = affinity_from_coefficients(C)
        labels = spectral_cluster(A, n_clusters, k_eig=cfg.k_eig or None,
                                  seed=stream_int(seed, "kmeans"), restarts=cfg.restarts)
        return A, labels

    A, labels = _stage("spectral", spectral)
    t2 = time.perf_counter()

    def measure():
        k = min(N, max(cfg.n_eigenvalues, n_clusters + 1))
        eig = eigen_gap_report(A, k)
        rep = evaluate(labels, truth, C, A) if truth is not None else None
        return eig, rep

    eig, report = _stage("metrics", measure)
    t3 = time.perf_counter()

    Cc = sp.csc_matrix(C)
    nan = float("nan")
    row = {"schema": SCHEMA_REPORT, "trial": trial}
    row.update({f: getattr(cfg, f) for f in PARAM_FIELDS if f != "trial"})
    row["seed"] = seed
    row.update(
        N=N, n_clusters=n_clusters,
        accuracy_pct=report.accuracy_pct if report else nan,
        sre_pct=report.sre_pct if report else nan,
        conn_min=report.conn_min if report else nan,
        conn_mean=report.conn_mean if report else nan,
        nnz=Cc.nnz, nnz_per_col=Cc.nnz / N,
        max_outer_iter=int(res.n_iter.max()) if res else 0,
        converged_frac=float(res.converged.mean()) if res else 1.0,
        empty_subproblems=len(res.empty_subproblems) if res else 0,
        singleton_clusters=report.singleton_clusters if report else 0,
        eig_gap=float(eig[n_clusters] - eig[n_clusters - 1]) if eig.size > n_clusters else nan,
    )
    timings = {"schema": SCHEMA_TIMINGS, "method": cfg.method, "n_i": cfg.n_i, "seed": seed,
               "trial": trial, "self_expression_s": t1 - t0, "spectral_s": t2 - t1,
               "metrics_s": t3 - t2, "total_s": t3 - t_start}
    result = RunResult(row=row, timings=timings, report=report, labels=labels, truth=truth,
                       C=Cc, A=A, eigenvalues=eig, trace=res.trace if res else [],
                       converged=bool(res.converged.all()) if res else True)
    if write:
        _stage("output", _write_run, result, cfg, out_dir or cfg.out)
    return result


def _write_run(result, cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "report.csv"), REPORT_HEADER, [result.row])
    write_csv(os.path.join(out_dir, "timings.csv"), TIMINGS_HEADER, [result.timings])
    save_labels(result.labels, os.path.join(out_dir, "labels.txt"))
    if cfg.dump:
        sp.save_npz(os.path.join(out_dir, "C.npz"), result.C)
        sp.save_npz(os.path.join(out_dir, "affinity.npz"), sp.csr_matrix(result.A))
        write_csv(os.path.join(out_dir, "eigenvalues.csv"), EIGEN_HEADER,
                  _eigen_rows(result))
        if result.report is not None:
            write_csv(os.path.join(out_dir, "lambda2.csv"), LAMBDA2_HEADER,
                      _lambda2_rows(result))


EIGEN_HEADER = ("schema", "method", "n_i", "seed", "trial", "index", "eigenvalue")
LAMBDA2_HEADER = ("schema", "method", "n_i", "seed", "trial", "cluster", "lambda2")


def _eigen_rows(result):
    base = {k: result.row[k] for k in ("method", "n_i", "seed", "trial")}
    return [dict(base, schema=SCHEMA_EIGEN, index=i + 1, eigenvalue=float(v))
            for i, v in enumerate(result.eigenvalues)]


def _lambda2_rows(result):
    base = {k: result.row[k] for k in ("method", "n_i", "seed", "trial")}
    return [dict(base, schema=SCHEMA_LAMBDA2, cluster=i + 1, lambda2=float(v))
            for i, v in enumerate(result.report.per_cluster_lambda2)]


# ----------------------------------------------------------------------------- sweeps

SWEEP_HEADER = ("schema",) + PARAM_FIELDS + RESULT_FIELDS + ("wall_time_s", "status", "error")
SUMMARY_METRICS = ("accuracy_pct", "sre_pct", "conn_min", "conn_mean", "nnz_per_col",
                   "eig_gap", "wall_time_s")
SUMMARY_HEADER = ("schema", "method", "n_i", "delta", "T", "lam", "trials", "failed") + tuple(
    f"mean_{m}" for m in SUMMARY_METRICS)


def _failed_row(cfg, trial, exc):
    row = {h: "" for h in SWEEP_HEADER}
    row.update({f: getattr(cfg, f) for f in PARAM_FIELDS if f != "trial"})
    row.update(schema=SCHEMA_SWEEP, trial=trial, seed=trial_seed(cfg, trial),
               status="failed", error=str(exc).replace("\n", " "))
    return row


def _trials(cfg, schema, eig_rows=None, lam2_rows=None, dump_dir=None):
    rows = []
    for trial in range(cfg.trials):
        try:
            sub = None
            if dump_dir and cfg.dump:
                sub = os.path.join(dump_dir, f"{cfg.method}_ni{cfg.n_i}_d{cfg.delta}_T{cfg.T}"
                                             f"_trial{trial}")
            res = run_once(cfg, trial, out_dir=sub, write=sub is not None)
        except StageError as exc:
            rows.append(dict(_failed_row(cfg, trial, exc), schema=schema))
            continue
        rows.append(dict(res.row, schema=schema, wall_time_s=res.timings["total_s"],
                         status="ok", error=""))
        if eig_rows is not None:
            eig_rows.extend(_eigen_rows(res))
        if lam2_rows is not None and res.report is not None:
            lam2_rows.extend(_lambda2_rows(res))
    return rows


def summarize(rows, keys=("method", "n_i", "delta", "T", "lam")):
    """Mean of every summary metric over the ``ok`` trials of each cell."""
    cells = {}
    for r in rows:
        cells.setdefault(tuple(str(r[k]) for k in keys), []).append(r)
    out = []
    for cell_rows in cells.values():
        ok = [r for r in cell_rows if r["status"] == "ok"]
        first = cell_rows[0]
        s = {"schema": SCHEMA_SUMMARY, "trials": len(ok), "failed": len(cell_rows) - len(ok)}
        s.update({k: first[k] for k in keys})
        for m in SUMMARY_METRICS:
            vals = [float(r[m]) for r in ok]
            s[f"mean_{m}"] = float(np.mean(vals)) if vals else float("nan")
        out.append(s)
    return out


def run_sweep_ni(cfg, ni_list=None, methods=None, out_dir=None):
    """Rows for every (method, N_i, trial); writes sweep, summary, eigenvalue and lambda_2 CSVs."""
    ni_list = tuple(cfg.ni_list if ni_list is None else ni_list)
    methods = tuple(methods or (cfg.method,))
    out_dir = out_dir or cfg.out
    rows, eig_rows, lam2_rows = [], [], []
    for method in methods:
        for n_i in ni_list:
            cell = dataclasses.replace(cfg, method=method).with_presets(n_i)
            rows.extend(_trials(cell, SCHEMA_SWEEP, eig_rows, lam2_rows, out_dir))
    write_csv(os.path.join(out_dir, "sweep_ni.csv"), SWEEP_HEADER, rows)
    write_csv(os.path.join(out_dir, "sweep_ni_summary.csv"), SUMMARY_HEADER, summarize(rows))
    write_csv(os.path.join(out_dir, "eigenvalues.csv"), EIGEN_HEADER, eig_rows)
    write_csv(os.path.join(out_dir, "lambda2.csv"), LAMBDA2_HEADER, lam2_rows)
    return rows


GRID_MATRIX_FILES = {"accuracy": "grid_accuracy.csv", "connectivity": "grid_connectivity.csv",
                     "subspace_preserving_rate": "grid_spr.csv"}


def run_grid_delta_t(cfg, deltas=None, Ts=None, out_dir=None):
    """Sweep dropout rate and subproblem count; returns ``{name: len(deltas) x len(Ts)}``.

    Matrices hold trial means of accuracy, connectivity ``c`` and the
    subspace-preserving rate ``100 - sre``.
    """
    deltas = tuple(cfg.delta_list if deltas is None else deltas)
    Ts = tuple(cfg.T_list if Ts is None else Ts)
    out_dir = out_dir or cfg.out
    rows = []
    mats = {k: np.full((len(deltas), len(Ts)), np.nan) for k in GRID_MATRIX_FILES}
    for a, delta in enumerate(deltas):
        for b, T in enumerate(Ts):
            cell = dataclasses.replace(cfg, delta=float(delta), T=int(T))
            cell_rows = _trials(cell, SCHEMA_GRID)
            rows.extend(cell_rows)
            ok = [r for r in cell_rows if r["status"] == "ok"]
            if ok:
                mats["accuracy"][a, b] = np.mean([r["accuracy_pct"] for r in ok])
                mats["connectivity"][a, b] = np.mean([r["conn_min"] for r in ok])
                mats["subspace_preserving_rate"][a, b] = np.mean([100.0 - r["sre_pct"] for r in ok])
    write_csv(os.path.join(out_dir, "grid.csv"), SWEEP_HEADER, rows)
    header = ("schema", "quantity", "delta") + tuple(f"T{T}" for T in Ts)
    for name, fname in GRID_MATRIX_FILES.items():
        mrows = [dict({"schema": SCHEMA_MATRIX, "quantity": name, "delta": float(d)},
                      **{f"T{T}": mats[name][a, b] for b, T in enumerate(Ts)})
                 for a, d in enumerate(deltas)]
        write_csv(os.path.join(out_dir, fname), header, mrows)
    return mats


TRACE_HEADER = ("schema", "method", "n_i", "delta", "T", "lam", "s", "averaging",
                "union_selection", "eps_outer", "max_outer", "seed", "trial", "iteration",
                "rel_change", "converged")


def run_convergence_trace(cfg, out_dir=None):
    """Relative change of C per outer iteration (from iteration 2) for every trial.

    ``converged`` is true for a trial when every column met the
    relative-change test before ``max_outer`` ran out.
    """
    if cfg.method != "s3comp_c":
        raise InvalidSpecError("convergence traces need method s3comp_c")
    out_dir = out_dir or cfg.out
    rows, traces = [], []
    for trial in range(cfg.trials):
        seed = trial_seed(cfg, trial)
        X, _ = _stage("data", load_data, cfg, seed)
        _, res = _stage("self-expression", self_expression, X, cfg, seed)
        converged = bool(res.converged.all())
        traces.append((res.trace, converged))
        for it, val in enumerate(res.trace, start=2):
            rows.append({"schema": SCHEMA_TRACE, "method": cfg.method, "n_i": cfg.n_i,
                         "delta": cfg.delta, "T": cfg.T, "lam": cfg.lam, "s": cfg.s,
                         "averaging": cfg.averaging, "union_selection": cfg.union_selection,
                         "eps_outer": cfg.eps_outer, "max_outer": cfg.max_outer, "seed": seed,
                         "trial": trial, "iteration": it, "rel_change": val,
                         "converged": converged})
    write_csv(os.path.join(out_dir, "trace.csv"), TRACE_HEADER, rows)
    return traces


# ----------------------------------------------------------------------------- plots

def _schema_of(rows, path):
    if not rows or "schema" not in rows[0]:
        raise SchemaError(f"{path}: no schema column or no rows")
    schemas = {r["schema"] for r in rows}
    if len(schemas) != 1:
        raise SchemaError(f"{path}: mixed schemas {sorted(schemas)}")
    return schemas.pop()


def _num(rows, key):
    return np.array([float(r[key]) if r[key] != "" else np.nan for r in rows])


def _plot_sweep(rows, ax_list):
    ok = [r for r in rows if r.get("status", "ok") == "ok"]
    for method in sorted({r["method"] for r in ok}):
        mrows = [r for r in ok if r["method"] == method]
        nis = sorted({int(r["n_i"]) for r in mrows})
        for ax, key in zip(ax_list, ("accuracy_pct", "conn_min", "wall_time_s")):
            means = [np.mean(_num([r for r in mrows if int(r["n_i"]) == ni], key)) for ni in nis]
            ax.plot(nis, means, marker="o", label=method)
    for ax, title in zip(ax_list, ("accuracy (%)", "connectivity c", "time (s)")):
        ax.set_xscale("log")
        ax.set_xlabel("points per subspace")
        ax.set_title(title)
        ax.legend()


def emit_plots(paths, out_dir):
    """Render one SVG per CSV artifact, chosen by the file's schema column.

    Raises :class:`SchemaError` for files without a plottable schema.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    written = []
    for path in paths:
        rows = read_csv(path)
        schema = _schema_of(rows, path)
        stem = os.path.splitext(os.path.basename(path))[0]
        if schema in (SCHEMA_SWEEP, SCHEMA_REPORT):
            fig, axes = plt.subplots(1, 3, figsize=(13, 4))
            if schema == SCHEMA_REPORT:
                rows = [dict(r, status="ok", wall_time_s="nan") for r in rows]
            _plot_sweep(rows, axes)
        elif schema == SCHEMA_MATRIX:
            fig, ax = plt.subplots(figsize=(8, 4))
            tcols = [k for k in rows[0] if k.startswith("T")]
            M = np.array([[float(r[k]) for k in tcols] for r in rows])
            im = ax.imshow(M, aspect="auto", origin="lower")
            ax.set_xticks(range(len(tcols)), [k[1:] for k in tcols])
            ax.set_yticks(range(len(rows)), [r["delta"] for r in rows])
            ax.set_xlabel("T")
            ax.set_ylabel("dropout rate")
            ax.set_title(rows[0]["quantity"])
            fig.colorbar(im, ax=ax)
        elif schema == SCHEMA_TRACE:
            fig, ax = plt.subplots(figsize=(6, 4))
            for trial in sorted({int(r["trial"]) for r in rows}):
                tr = [r for r in rows if int(r["trial"]) == trial]
                ax.semilogy(_num(tr, "iteration"), _num(tr, "rel_change"), marker=".",
                            label=f"trial {trial}")
            ax.set_xlabel("outer iteration")
            ax.set_ylabel("relative change of C")
        elif schema == SCHEMA_EIGEN:
            fig, ax = plt.subplots(figsize=(6, 4))
            groups = sorted({(r["method"], r["n_i"], r["trial"]) for r in rows})
            for g in groups:
                gr = [r for r in rows if (r["method"], r["n_i"], r["trial"]) == g]
                ax.plot(_num(gr, "index"), np.sort(_num(gr, "eigenvalue")), marker=".",
                        label=f"{g[0]} N_i={g[1]} trial {g[2]}" if len(groups) <= 12 else None)
            ax.set_xlabel("index")
            ax.set_ylabel("eigenvalue")
            if len(groups) <= 12:
                ax.legend(fontsize="small")
        elif schema == SCHEMA_LAMBDA2:
            fig, ax = plt.subplots(figsize=(6, 4))
            for method in sorted({r["method"] for r in rows}):
                ax.hist(_num([r for r in rows if r["method"] == method], "lambda2"),
                        bins=20, alpha=0.6, label=method)
            ax.set_xlabel("per-cluster algebraic connectivity")
            ax.set_ylabel("count")
            ax.legend()
        else:
            raise SchemaError(f"{path}: no plot defined for schema {schema!r}")
        target = os.path.join(out_dir, f"{stem}.svg")
        fig.tight_layout()
        fig.savefig(target, format="svg")
        plt.close(fig)
        written.append(target)
    return written
