"""Command-line entry point.

Subcommands::

    zsadjust synth    generate a synthetic dataset on disk
    zsadjust train    train, adjust prototypes, evaluate, write artifacts
    zsadjust eval     score an existing model on unseen-class instances
    zsadjust sweep-k  Hit@1 as a function of the neighbor count k
    zsadjust bench    wall-clock timing of training

Every option can also come from a ``key = value`` config file passed
with ``--config``; explicit flags win on conflict. Exit codes: 0 ok,
1 configuration error, 2 data error, 3 solver error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .data import (
    LabeledDataset,
    SynthSpec,
    load_labels,
    load_matrix,
    load_prototypes,
    save_labels,
    save_matrix,
    save_prototypes,
    split,
    synthesize,
)
from .errors import ConfigError, DataError, SolverError
from .inference import evaluate, sweep_k
from .mapping import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_GAMMA1,
    DEFAULT_GAMMA2,
    DEFAULT_ITERATIONS,
    DEFAULT_K,
    DEFAULT_LAMBDA1,
    DEFAULT_LAMBDA2,
    DEFAULT_TOL,
    HyperParams,
    MappingModel,
)
from .trainer import benchmark_training, train

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_SOLVER = 3

# Canonical artifact names inside the output directory.
F_FEATURES = "features.zsm"
F_LABELS = "labels.txt"
F_PROTOTYPES = "prototypes.zsm"
F_PARTITION = "partition.txt"
F_GMAP = "ground_truth_map.zsm"
F_MODEL = "model.zsm"
F_ADJ_PROTOTYPES = "prototypes_adjusted.zsm"
F_ADJ_PARTITION = "partition_adjusted.txt"
F_TRACE = "trace.jsonl"
F_REPORT_TXT = "report.txt"
F_REPORT_JSON = "report.json"
F_SWEEP = "sweep.csv"
F_BENCH_TXT = "bench.txt"
F_BENCH_JSON = "bench.json"


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text):
    values = tuple(int(tok) for tok in str(text).split(",") if tok.strip())
    if any(v < 1 for v in values):
        raise ValueError("every k must be >= 1")
    return values


def _choice(*allowed):
    def convert(text):
        if text not in allowed:
            raise ValueError(f"must be one of {', '.join(allowed)}")
        return text

    return convert


# Option tables: (flag, type converter, default, help). All conversion
# happens after config merging so that bad values from either source
# report as configuration errors.
HYPER_OPTS = [
    ("--lambda1", float, DEFAULT_LAMBDA1, "seen-prototype anchor weight"),
    ("--gamma1", float, DEFAULT_GAMMA1, "seen-prototype mapped-mean weight"),
    ("--lambda2", float, DEFAULT_LAMBDA2, "unseen-prototype anchor weight"),
    ("--gamma2", float, DEFAULT_GAMMA2, "unseen-neighbor blend weight"),
    ("--alpha", float, DEFAULT_ALPHA, "centroid regularizer weight"),
    ("--beta", float, DEFAULT_BETA, "mapping-constraint relaxation weight"),
    ("--k", int, DEFAULT_K, "seen neighbors per unseen prototype"),
    ("--iters", int, DEFAULT_ITERATIONS, "alternating iteration budget"),
    ("--tol", float, DEFAULT_TOL, "relative weight-change stop threshold"),
    ("--unseen-neighbors", _choice("adjusted", "original"), "adjusted",
     "seen prototypes used for the unseen-neighbor blend"),
    ("--ridge-retry", _bool, False,
     "retry a singular solve once with a ridge added to the prototype Gram"),
]

FILE_OPTS = [
    ("--features", str, None, "feature matrix file (binary or CSV)"),
    ("--labels", str, None, "labels file, one class id per line"),
    ("--prototypes", str, None, "prototype matrix file"),
    ("--partition", str, None, "seen/unseen sidecar, '<id> <S|U>' lines"),
]

SYNTH_OPTS = [
    ("--synth-dv", int, 50, "synthetic visual dimension"),
    ("--synth-ds", int, 20, "synthetic semantic dimension"),
    ("--synth-seen", int, 40, "synthetic seen-class count"),
    ("--synth-unseen", int, 10, "synthetic unseen-class count"),
    ("--synth-per-class", int, 25, "synthetic instances per class"),
    ("--synth-noise", float, 0.0, "instance noise sigma"),
    ("--synth-shift", float, 0.0, "unseen-class generator perturbation sigma"),
]

COMMON_OPTS = [
    ("--seed", int, 0, "random seed for synthetic data"),
    ("--normalize", _choice("none", "features", "prototypes", "both"), "none",
     "L2-normalize feature columns and/or prototypes before use"),
    ("--out", str, ".", "output directory"),
    ("--config", str, None, "key = value config file; flags win on conflict"),
]

EVAL_OPTS = [
    ("--ks", _int_list, (1, 5), "comma-separated k values for Hit@k"),
    ("--direction", _choice("semantic", "visual"), "semantic",
     "ranking space: semantic (W x vs p) or visual (x vs W^T p)"),
]


def _dest(flag):
    return flag.lstrip("-").replace("-", "_")


def _add_opts(parser, opts):
    for flag, _conv, default, help_text in opts:
        parser.add_argument(flag, default=None, metavar="V",
                            help=f"{help_text} (default: {default})")


def _add_synth_toggle(parser):
    parser.add_argument("--synth", nargs="?", const="true", default=None,
                        metavar="BOOL",
                        help="generate data in-memory instead of loading "
                             "files (default: False)")


def _read_config(path):
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, val = line.split("=", 1)
            values[_dest(key.strip())] = val.strip()
    return values


def _resolve(args, opt_tables, has_synth_toggle=False):
    """Merge flag values over config-file values over defaults."""
    config = {}
    if getattr(args, "config", None):
        config = _read_config(args.config)

    tables = [opt for table in opt_tables for opt in table]
    known = {_dest(flag) for flag, *_ in tables}
    known.add("config")
    if has_synth_toggle:
        known.add("synth")
    for key in config:
        if key not in known:
            raise ConfigError(f"unknown config key: {key}")

    out = argparse.Namespace()
    for flag, conv, default, _help in tables:
        dest = _dest(flag)
        raw = getattr(args, dest, None)
        if raw is None:
            raw = config.get(dest)
        if raw is None:
            value = default
        else:
            try:
                value = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {flag}: {exc}") from exc
        setattr(out, dest, value)
    if has_synth_toggle:
        raw = args.synth if args.synth is not None else config.get("synth")
        out.synth = _bool(raw) if raw is not None else False
    return out


def _hyperparams(opts):
    try:
        return HyperParams(
            lambda1=opts.lambda1, gamma1=opts.gamma1,
            lambda2=opts.lambda2, gamma2=opts.gamma2,
            alpha=opts.alpha, beta=opts.beta,
            k=opts.k, iterations=opts.iters, tol=opts.tol,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _synth_spec(opts):
    try:
        return SynthSpec(
            d_v=opts.synth_dv, d_s=opts.synth_ds,
            seen_count=opts.synth_seen, unseen_count=opts.synth_unseen,
            per_class=opts.synth_per_class,
            noise_sigma=opts.synth_noise, shift_sigma=opts.synth_shift,
            seed=opts.seed,
        )
    except DataError as exc:
        raise ConfigError(str(exc)) from exc


def _require_file(path, flag):
    if path is None:
        raise ConfigError(f"{flag} is required (or use --synth)")
    if not os.path.isfile(path):
        raise DataError(f"file not found: {path}")
    return path


def _normalize(dataset, table, mode):
    if mode in ("features", "both"):
        norms = np.linalg.norm(dataset.features, axis=0, keepdims=True)
        if np.any(norms == 0.0):
            raise DataError("cannot normalize a zero feature column")
        dataset = LabeledDataset(dataset.features / norms, dataset.labels,
                                 dataset.class_count)
    if mode in ("prototypes", "both"):
        norms = np.linalg.norm(table.vectors, axis=0, keepdims=True)
        table = table.with_vectors(table.vectors / norms)
    return dataset, table


def _load_run_data(opts):
    """Dataset and prototype table, synthetic or from files, normalized."""
    if opts.synth:
        dataset, table, _ = synthesize(_synth_spec(opts))
    else:
        feats = load_matrix(_require_file(opts.features, "--features"))
        labels = load_labels(_require_file(opts.labels, "--labels"))
        table = load_prototypes(
            _require_file(opts.prototypes, "--prototypes"),
            _require_file(opts.partition, "--partition"),
        )
        class_count = int(max(labels.max(initial=0),
                              table.class_ids.max())) + 1
        dataset = LabeledDataset(feats, labels, class_count)
    return _normalize(dataset, table, opts.normalize)


def _out_dir(opts):
    path = opts.out
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".write_probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {path}") from exc
    return path


def _fmt(value):
    return f"{value:.12g}" if isinstance(value, float) else str(value)


def _write_report(report, out_dir):
    lines = [
        ("instance_count", report.instance_count),
        ("zero_mapped", report.zero_mapped),
    ]
    for k in sorted(report.hit_at):
        lines.append((f"hit_at_{k}", report.hit_at[k]))
    for cid in sorted(report.per_class_accuracy):
        lines.append((f"per_class_accuracy_{cid}",
                      report.per_class_accuracy[cid]))
    lines.append(("hubness_skewness", report.hubness_skewness))
    lines.append(("timing_ms", report.timing_ms))
    with open(os.path.join(out_dir, F_REPORT_TXT), "w") as fh:
        for key, value in lines:
            fh.write(f"{key} {_fmt(value)}\n")
    with open(os.path.join(out_dir, F_REPORT_JSON), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    for key, value in lines:
        print(f"{key} {_fmt(value)}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args):
    opts = _resolve(args, [SYNTH_OPTS, COMMON_OPTS])
    out_dir = _out_dir(opts)
    dataset, table, gmap = synthesize(_synth_spec(opts))
    save_matrix(os.path.join(out_dir, F_FEATURES), dataset.features)
    save_labels(os.path.join(out_dir, F_LABELS), dataset.labels)
    save_prototypes(table, os.path.join(out_dir, F_PROTOTYPES),
                    os.path.join(out_dir, F_PARTITION))
    save_matrix(os.path.join(out_dir, F_GMAP), gmap)
    print(f"wrote synthetic dataset ({dataset.instance_count} instances, "
          f"{table.class_ids.size} classes) to {out_dir}")
    return EXIT_OK


def cmd_train(args):
    opts = _resolve(args, [FILE_OPTS, SYNTH_OPTS, HYPER_OPTS, COMMON_OPTS,
                           EVAL_OPTS], has_synth_toggle=True)
    hp = _hyperparams(opts)
    out_dir = _out_dir(opts)
    dataset, table = _load_run_data(opts)
    seen, unseen = split(dataset, table)

    model, adjusted, trace = train(
        seen, table, hp,
        unseen_neighbors=opts.unseen_neighbors,
        ridge_on_failure=opts.ridge_retry,
    )

    save_matrix(os.path.join(out_dir, F_MODEL), model.weights)
    save_prototypes(adjusted.table,
                    os.path.join(out_dir, F_ADJ_PROTOTYPES),
                    os.path.join(out_dir, F_ADJ_PARTITION))
    with open(os.path.join(out_dir, F_TRACE), "w") as fh:
        for record in trace.records:
            fh.write(json.dumps(record.to_dict()))
            fh.write("\n")
    print(f"trained in {len(trace)} iteration(s); artifacts in {out_dir}")

    if unseen.instance_count > 0:
        report = evaluate(model, unseen, adjusted, ks=opts.ks,
                          direction=opts.direction)
        _write_report(report, out_dir)
    else:
        print("evaluation skipped: no unseen-class instances in the data")
    return EXIT_OK


def cmd_eval(args):
    opts = _resolve(args, [[("--model", str, None, "model weights file")],
                           FILE_OPTS, SYNTH_OPTS, COMMON_OPTS, EVAL_OPTS],
                    has_synth_toggle=True)
    out_dir = _out_dir(opts)
    weights = load_matrix(_require_file(opts.model, "--model"))
    model = MappingModel(weights)
    dataset, table = _load_run_data(opts)
    if model.visual_dim != dataset.feature_dim:
        raise DataError(
            f"model expects {model.visual_dim}-dimensional features, "
            f"data has {dataset.feature_dim}"
        )
    if model.semantic_dim != table.semantic_dim:
        raise DataError(
            f"model maps into {model.semantic_dim} semantic dimensions, "
            f"prototypes have {table.semantic_dim}"
        )
    _, unseen = split(dataset, table)
    if unseen.instance_count == 0:
        raise DataError("no unseen-class instances to evaluate")
    report = evaluate(model, unseen, table, ks=opts.ks,
                      direction=opts.direction)
    _write_report(report, out_dir)
    return EXIT_OK


def cmd_sweep_k(args):
    opts = _resolve(args, [[("--k-list", _int_list, (1, 5, 10),
                             "comma-separated k values to sweep")],
                           FILE_OPTS, SYNTH_OPTS, HYPER_OPTS, COMMON_OPTS],
                    has_synth_toggle=True)
    if not opts.k_list:
        raise ConfigError("--k-list must name at least one k")
    hp = _hyperparams(opts)
    out_dir = _out_dir(opts)
    dataset, table = _load_run_data(opts)
    seen, unseen = split(dataset, table)
    if unseen.instance_count == 0:
        raise DataError("no unseen-class instances to evaluate")

    curve = sweep_k(seen, unseen, table, hp, opts.k_list,
                    unseen_neighbors=opts.unseen_neighbors,
                    ridge_on_failure=opts.ridge_retry)
    # Two bare CSV columns (k, Hit@1) so the file round-trips through the
    # CSV matrix loader and plots anywhere.
    with open(os.path.join(out_dir, F_SWEEP), "w") as fh:
        for k in opts.k_list:
            fh.write(f"{k},{curve[int(k)]:.17g}\n")
    for k in opts.k_list:
        print(f"k={k} hit_at_1={_fmt(curve[int(k)])}")
    return EXIT_OK


def cmd_bench(args):
    opts = _resolve(args, [[("--repeats", int, 1, "number of timed runs")],
                           FILE_OPTS, SYNTH_OPTS, HYPER_OPTS, COMMON_OPTS],
                    has_synth_toggle=True)
    if opts.repeats < 1:
        raise ConfigError("--repeats must be >= 1")
    hp = _hyperparams(opts)
    out_dir = _out_dir(opts)
    if opts.synth:
        payload = _synth_spec(opts)
    else:
        dataset, table = _load_run_data(opts)
        seen, _ = split(dataset, table)
        payload = (seen, table)

    result = benchmark_training(payload, hp, repeats=opts.repeats,
                                unseen_neighbors=opts.unseen_neighbors,
                                ridge_on_failure=opts.ridge_retry)
    with open(os.path.join(out_dir, F_BENCH_TXT), "w") as fh:
        fh.write(f"repeats {result.repeats}\n")
        fh.write(f"median_ms {_fmt(result.median_ms)}\n")
        fh.write(f"max_ms {_fmt(result.max_ms)}\n")
    with open(os.path.join(out_dir, F_BENCH_JSON), "w") as fh:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"repeats {result.repeats}")
    print(f"median_ms {_fmt(result.median_ms)}")
    print(f"max_ms {_fmt(result.max_ms)}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="zsadjust",
        description="Zero-shot recognition with adaptive semantic "
                    "feature-space adjustment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset on disk")
    _add_opts(p, SYNTH_OPTS)
    _add_opts(p, COMMON_OPTS)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train and evaluate, writing artifacts")
    _add_synth_toggle(p)
    for table in (FILE_OPTS, SYNTH_OPTS, HYPER_OPTS, COMMON_OPTS, EVAL_OPTS):
        _add_opts(p, table)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score an existing model")
    _add_synth_toggle(p)
    _add_opts(p, [("--model", str, None, "model weights file")])
    for table in (FILE_OPTS, SYNTH_OPTS, COMMON_OPTS, EVAL_OPTS):
        _add_opts(p, table)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep-k", help="Hit@1 over a range of k values")
    _add_synth_toggle(p)
    _add_opts(p, [("--k-list", _int_list, (1, 5, 10),
                   "comma-separated k values to sweep")])
    for table in (FILE_OPTS, SYNTH_OPTS, HYPER_OPTS, COMMON_OPTS):
        _add_opts(p, table)
    p.set_defaults(func=cmd_sweep_k)

    p = sub.add_parser("bench", help="time the training loop")
    _add_synth_toggle(p)
    _add_opts(p, [("--repeats", int, 1, "number of timed runs")])
    for table in (FILE_OPTS, SYNTH_OPTS, HYPER_OPTS, COMMON_OPTS):
        _add_opts(p, table)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the config exit code
        # and preserve 0 for --help.
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def entry_point():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
