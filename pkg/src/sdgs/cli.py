"""Command-line front end: train, predict, evaluate, synth, bench.

Every error path exits nonzero with a one-line machine-parseable prefix:
``error[invalid-input]`` (exit 1), ``error[numerical]`` (exit 2) or
``error[io]`` (exit 3). A simple ``key = value`` config file can supply
any value-bearing flag; explicit flags win. The default seed comes from
the ``SDGS_SEED`` environment variable.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .data import (
    FORMATS,
    NORMALIZATIONS,
    DatasetSource,
    load_dataset,
    read_matrix,
    save_delimited,
)
from .decomposition import (
    MultiSubspaceModel,
    TrainingConfig,
    group_layout_from_widths,
    train,
)
from .errors import InvalidInputError, ModelFileError, NumericalError, SdgsError
from .metrics import evaluate, macro_f1, micro_f1
from .model_io import load_model, save_model
from .prediction import FALLBACKS, SCORE_NORMS, PredictionConfig, predict_batch, threshold_scores
from .synthetic import SyntheticSpec, generate_synthetic

REPORT_FORMATS = ("table", "csv", "json-lines")


class _Parser(argparse.ArgumentParser):
    # invalid flags/config must exit 1, not argparse's default 2
    def error(self, message):
        self.exit(1, f"error[invalid-input]: {message}\n")


def _parse_sparsity(text: str):
    try:
        if any(ch in text for ch in ".eE"):
            return float(text)
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sparsity budget {text!r}") from None


def _parse_int_list(text: str):
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _parse_float_list(text: str):
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from None


def _add_dataset_flags(parser, required=True):
    parser.add_argument("--data", required=required, help="dataset file path")
    parser.add_argument("--format", choices=FORMATS, default="delimited", help="dataset file format")
    parser.add_argument("--labels", type=int, default=None, help="number of trailing label columns")
    parser.add_argument("--normalize", choices=NORMALIZATIONS, default="zscore",
                        help="feature normalization fitted on this data")


def _add_prediction_flags(parser):
    parser.add_argument("--lam", type=float, default=0.3, help="group penalty weight")
    parser.add_argument("--delta", type=float, default=1e-3, help="group score threshold")
    parser.add_argument("--delta-sweep", type=_parse_float_list, default=(),
                        help="extra thresholds, one prediction column per value")
    parser.add_argument("--score-norm", choices=SCORE_NORMS, default="l1")
    parser.add_argument("--fallback", choices=FALLBACKS, default="allow-empty")
    parser.add_argument("--solver-iters", type=int, default=1000)
    parser.add_argument("--kkt-tolerance", type=float, default=1e-6)


def _add_training_flags(parser):
    parser.add_argument("--rank", type=int, default=3, help="shared per-label rank budget")
    parser.add_argument("--ranks", type=_parse_int_list, default=None,
                        help="comma-separated per-label rank budgets (overrides --rank)")
    parser.add_argument("--sparsity", type=_parse_sparsity, default=1e-4,
                        help="residual budget: integer count or fraction in [0,1)")
    parser.add_argument("--epsilon", type=float, default=1e-6)
    parser.add_argument("--max-rounds", type=int, default=50)
    parser.add_argument("--relative-tolerance", type=float, default=1e-6)
    parser.add_argument("--approx", choices=("svd", "brp"), default="svd")
    parser.add_argument("--power-passes", type=int, default=1)


def build_parser() -> _Parser:
    parser = _Parser(prog="sdgs", description="Multi-label learning via structured decomposition and group sparsity")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="key=value file supplying defaults for any flag")
        p.add_argument("--seed", type=int, default=None, help="random seed (default: $SDGS_SEED or 0)")
        p.add_argument("--verbose", action="store_true")
        p.add_argument("--report-format", choices=REPORT_FORMATS, default="table")
        p.add_argument("--output", default=None, help="write the report here instead of stdout")

    p_train = sub.add_parser("train", help="fit a multi-subspace model", parents=[])
    common(p_train)
    _add_dataset_flags(p_train)
    _add_training_flags(p_train)
    p_train.add_argument("--model", required=True, help="output model file")

    p_predict = sub.add_parser("predict", help="predict labels for raw samples")
    common(p_predict)
    p_predict.add_argument("--model", required=True, help="trained model file")
    p_predict.add_argument("--data", required=True, help="samples file (raw features)")
    p_predict.add_argument("--format", choices=FORMATS, default="delimited")
    p_predict.add_argument("--labels", type=int, default=0,
                           help="trailing label columns to strip from the samples file")
    _add_prediction_flags(p_predict)

    p_eval = sub.add_parser("evaluate", help="score predictions against ground truth")
    common(p_eval)
    p_eval.add_argument("--truth", required=True, help="dataset or label-matrix file")
    p_eval.add_argument("--truth-format", choices=FORMATS, default="delimited")
    p_eval.add_argument("--pred", required=True, help="prediction file (CSV from 'predict' or label matrix)")
    p_eval.add_argument("--labels", type=int, required=True, help="number of labels")

    p_synth = sub.add_parser("synth", help="generate synthetic train/test data")
    common(p_synth)
    p_synth.add_argument("--n-train", type=int, required=True)
    p_synth.add_argument("--n-test", type=int, default=0)
    p_synth.add_argument("--features", type=int, required=True)
    p_synth.add_argument("--labels", type=int, required=True)
    p_synth.add_argument("--rank", type=int, default=3)
    p_synth.add_argument("--ranks", type=_parse_int_list, default=None)
    p_synth.add_argument("--card", type=float, default=2.0, help="target mean labels per sample")
    p_synth.add_argument("--coeff-scale", type=float, default=1.0)
    p_synth.add_argument("--noise-fraction", type=float, default=0.0)
    p_synth.add_argument("--noise-magnitude", type=float, default=0.0)
    p_synth.add_argument("--out-dir", required=True)
    p_synth.add_argument("--prefix", default="synthetic")

    p_bench = sub.add_parser("bench", help="grid search, pick by training F1, score held out")
    common(p_bench)
    p_bench.add_argument("--train", dest="train_path", required=True)
    p_bench.add_argument("--test", dest="test_path", required=True)
    p_bench.add_argument("--format", choices=FORMATS, default="delimited")
    p_bench.add_argument("--labels", type=int, required=True)
    p_bench.add_argument("--normalize", choices=NORMALIZATIONS, default="zscore")
    p_bench.add_argument("--grid", required=True, help="JSON file mapping parameter names to value lists")
    p_bench.add_argument("--jobs", type=int, default=1)
    return parser


def _read_config_pairs(path: str) -> list[str]:
    """Turn a key=value file into synthetic argv tokens."""
    tokens: list[str] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key or not value:
                raise InvalidInputError(f"{path}:{line_no}: empty key or value")
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "yes", "on"):
                tokens.append(flag)
            elif value.lower() in ("false", "no", "off"):
                continue
            else:
                tokens.extend([flag, value])
    return tokens


def _merge_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    pos = argv.index("--config")
    if pos + 1 >= len(argv):
        return argv
    tokens = _read_config_pairs(argv[pos + 1])
    # config tokens go right after the subcommand so real flags win
    return argv[:1] + tokens + argv[1:]


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("SDGS_SEED", "0"))


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _format_table(headers, rows) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[j]) for row in cells) for j in range(len(headers))]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(len(headers))))
    return "\n".join(lines) + "\n"


def _format_csv(headers, rows) -> str:
    lines = [",".join(str(h) for h in headers)]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"


def _format_json_lines(records) -> str:
    return "".join(json.dumps(rec, separators=(",", ":")) + "\n" for rec in records)


def _load_features(path, fmt, n_label_cols):
    data, _, _ = read_matrix(path, fmt)
    if n_label_cols:
        if data.shape[1] <= n_label_cols:
            raise InvalidInputError(
                f"{path}: {data.shape[1]} columns cannot hold {n_label_cols} label columns plus features"
            )
        data = data[:, :-n_label_cols]
    return data


def _load_label_matrix(path, fmt, n_labels):
    """Trailing label block of a dataset file, or the y-columns of a
    prediction CSV written by the predict command."""
    data, names, _ = read_matrix(path, fmt)
    if names and any(name == "y0" for name in names):
        cols = [names.index(f"y{i}") for i in range(n_labels) if f"y{i}" in names]
        if len(cols) != n_labels:
            raise InvalidInputError(f"{path}: expected columns y0..y{n_labels - 1}")
        block = data[:, cols]
    else:
        if data.shape[1] < n_labels:
            raise InvalidInputError(f"{path}: fewer columns than the {n_labels} labels")
        block = data[:, -n_labels:]
    if not np.isin(block, (0.0, 1.0)).all():
        raise InvalidInputError(f"{path}: label block is not binary")
    return block.astype(np.int8)


def cmd_train(args) -> int:
    if args.labels is None or args.labels < 1:
        raise InvalidInputError("--labels is required and must be >= 1")
    source = DatasetSource(path=args.data, format=args.format, n_labels=args.labels,
                           normalization=args.normalize)
    ds = load_dataset(source)
    cfg = TrainingConfig(
        rank=args.ranks if args.ranks else args.rank,
        sparsity=args.sparsity,
        epsilon=args.epsilon,
        max_rounds=args.max_rounds,
        relative_tolerance=args.relative_tolerance,
        approx=args.approx,
        power_passes=args.power_passes,
        seed=_resolve_seed(args),
    )
    model, state, diag = train(ds, cfg)
    save_model(model, args.model)
    print(f"trained on {ds.n_samples} samples ({ds.n_features} features, {ds.n_labels} labels)")
    print(f"objective {diag.initial_objective:.6g} -> {diag.final_objective:.6g} "
          f"in {diag.rounds} rounds ({diag.stop_reason}), {diag.total_seconds:.3f}s wall")
    if args.verbose:
        for i, (obj, sec) in enumerate(zip(diag.round_objectives, diag.round_seconds), start=1):
            print(f"  round {i}: objective {obj:.6g} ({sec:.3f}s)")
    print(f"model written to {args.model}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    raw = _load_features(args.data, args.format, args.labels)
    if raw.shape[1] != model.n_features:
        raise InvalidInputError(f"samples have {raw.shape[1]} features, model expects {model.n_features}")
    features = model.normalization.apply(raw) if model.normalization else raw
    cfg = PredictionConfig(
        lam=args.lam,
        delta=args.delta,
        empty_fallback=args.fallback,
        score_norm=args.score_norm,
        max_iters=args.solver_iters,
        kkt_tolerance=args.kkt_tolerance,
    )
    predictions = predict_batch(features, model, cfg)
    widths = np.array(model.group_widths())
    sweep = [d for d in args.delta_sweep if d != args.delta]

    k = model.n_labels
    headers = (["sample"] + [f"y{i}" for i in range(k)] + [f"score{i}" for i in range(k)]
               + [f"y@{d:g}" for d in sweep] + ["converged"])
    rows, records = [], []
    for idx, pred in enumerate(predictions):
        sweep_bits = {}
        for d in sweep:
            alt = threshold_scores(pred.group_scores, widths,
                                   PredictionConfig(lam=args.lam, delta=d, empty_fallback=args.fallback,
                                                    score_norm=args.score_norm))
            sweep_bits[f"{d:g}"] = alt
        rows.append([idx] + [int(v) for v in pred.labels]
                    + [repr(float(s)) for s in pred.group_scores]
                    + ["".join(str(int(b)) for b in sweep_bits[f"{d:g}"]) for d in sweep]
                    + [int(pred.converged)])
        records.append({
            "sample": idx,
            "labels": [int(v) for v in pred.labels],
            "scores": [float(s) for s in pred.group_scores],
            "sweep": {key: [int(b) for b in bits] for key, bits in sweep_bits.items()},
            "converged": bool(pred.converged),
        })
    if args.report_format == "json-lines":
        _emit(_format_json_lines(records), args.output)
    elif args.report_format == "csv":
        _emit(_format_csv(headers, rows), args.output)
    else:
        _emit(_format_table(headers, rows), args.output)
    return 0


def _report_rows(report):
    return [
        ("hamming_loss", report.hamming_loss),
        ("precision", report.precision),
        ("recall", report.recall),
        ("f1", report.f1),
        ("accuracy", report.accuracy),
    ]


def cmd_evaluate(args) -> int:
    truth = _load_label_matrix(args.truth, args.truth_format, args.labels)
    pred = _load_label_matrix(args.pred, "delimited", args.labels)
    report = evaluate(truth, pred)
    if args.report_format == "json-lines":
        record = report.as_dict()
        record["micro_f1"] = micro_f1(truth, pred)
        record["macro_f1"] = macro_f1(truth, pred)
        _emit(_format_json_lines([record]), args.output)
    elif args.report_format == "csv":
        headers = [name for name, _ in _report_rows(report)] + ["n_samples", "degenerate_rows"]
        row = [repr(value) for _, value in _report_rows(report)] + [report.n_samples, report.degenerate_rows]
        _emit(_format_csv(headers, [row]), args.output)
    else:
        rows = [(name, f"{100 * value:.1f}") for name, value in _report_rows(report)]
        rows.append(("n_samples", report.n_samples))
        rows.append(("degenerate_rows", report.degenerate_rows))
        _emit(_format_table(["metric", "value"], rows), args.output)
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_train=args.n_train,
        n_test=args.n_test,
        n_features=args.features,
        n_labels=args.labels,
        rank=args.ranks if args.ranks else args.rank,
        label_cardinality=args.card,
        coefficient_scale=args.coeff_scale,
        noise_fraction=args.noise_fraction,
        noise_magnitude=args.noise_magnitude,
        seed=_resolve_seed(args),
    )
    train_ds, test_ds, bases = generate_synthetic(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    train_path = os.path.join(args.out_dir, f"{args.prefix}-train.csv")
    save_delimited(train_path, train_ds)
    written = [train_path]
    if test_ds is not None:
        test_path = os.path.join(args.out_dir, f"{args.prefix}-test.csv")
        save_delimited(test_path, test_ds)
        written.append(test_path)
    bases_model = MultiSubspaceModel(
        bases=bases,
        group_layout=group_layout_from_widths(b.shape[0] for b in bases),
        n_features=spec.n_features,
        ranks=spec.ranks(),
        training={"generator_seed": spec.seed},
        dataset_fingerprint=train_ds.fingerprint(),
    )
    bases_path = os.path.join(args.out_dir, f"{args.prefix}-bases.sdgs")
    save_model(bases_model, bases_path)
    written.append(bases_path)
    print(f"wrote {', '.join(written)}")
    print(f"train cardinality {train_ds.cardinality():.3f} over {train_ds.n_samples} samples")
    return 0


_GRID_KEYS = ("rank", "sparsity", "lam", "delta", "approx", "power_passes", "epsilon", "max_rounds")


def _read_grid(path) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: malformed grid file: {exc}") from exc
    if not isinstance(raw, dict) or not raw:
        raise InvalidInputError(f"{path}: grid file must be a non-empty JSON object")
    unknown = set(raw) - set(_GRID_KEYS)
    if unknown:
        raise InvalidInputError(f"{path}: unknown grid keys {sorted(unknown)}; allowed: {list(_GRID_KEYS)}")
    for key, values in raw.items():
        if not isinstance(values, list) or not values:
            raise InvalidInputError(f"{path}: grid key {key!r} must map to a non-empty list")
    keys = [k for k in _GRID_KEYS if k in raw]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(raw[k] for k in keys))]


def _bench_cell(cell_params, train_ds, raw_train_features, seed):
    started = time.thread_time()
    cfg = TrainingConfig(
        rank=int(cell_params.get("rank", 3)),
        sparsity=cell_params.get("sparsity", 1e-4),
        epsilon=float(cell_params.get("epsilon", 1e-6)),
        max_rounds=int(cell_params.get("max_rounds", 50)),
        approx=cell_params.get("approx", "svd"),
        power_passes=int(cell_params.get("power_passes", 1)),
        seed=seed,
    )
    model, _, diag = train(train_ds, cfg)
    pcfg = PredictionConfig(lam=float(cell_params.get("lam", 0.3)),
                            delta=float(cell_params.get("delta", 1e-3)))
    features = model.normalization.apply(raw_train_features) if model.normalization else raw_train_features
    predicted = np.array([p.labels for p in predict_batch(features, model, pcfg)])
    report = evaluate(train_ds.labels, predicted)
    return {
        "model": model,
        "pcfg": pcfg,
        "train_f1": report.f1,
        "train_report": report,
        "cpu_seconds": time.thread_time() - started,
        "train_rounds": diag.rounds,
    }


def cmd_bench(args) -> int:
    cells = _read_grid(args.grid)
    seed = _resolve_seed(args)
    source = DatasetSource(path=args.train_path, format=args.format, n_labels=args.labels,
                           normalization=args.normalize)
    train_ds = load_dataset(source)
    raw_train, _, _ = read_matrix(args.train_path, args.format)
    raw_train = raw_train[:, :-args.labels]
    raw_test, _, _ = read_matrix(args.test_path, args.format)
    if raw_test.shape[1] <= args.labels:
        raise InvalidInputError(f"{args.test_path}: not enough columns for {args.labels} labels")
    test_labels = raw_test[:, -args.labels:]
    if not np.isin(test_labels, (0.0, 1.0)).all():
        raise InvalidInputError(f"{args.test_path}: label block is not binary")
    test_features = raw_test[:, :-args.labels]

    jobs = max(1, args.jobs)
    if jobs == 1:
        results = [_bench_cell(cell, train_ds, raw_train, seed) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda c: _bench_cell(c, train_ds, raw_train, seed), cells))

    best_index = int(np.argmax([res["train_f1"] for res in results]))
    best = results[best_index]
    model = best["model"]
    features = model.normalization.apply(test_features) if model.normalization else test_features
    predicted = np.array([p.labels for p in predict_batch(features, model, best["pcfg"])])
    held_out = evaluate(test_labels.astype(np.int8), predicted)

    headers = ["cell", "params", "train_f1", "cpu_seconds", "selected"]
    rows, records = [], []
    for idx, (cell, res) in enumerate(zip(cells, results)):
        params = json.dumps(cell, separators=(",", ":"), sort_keys=True)
        rows.append([idx, params, f"{res['train_f1']:.6f}", f"{res['cpu_seconds']:.3f}",
                     "*" if idx == best_index else ""])
        records.append({"cell": idx, "params": cell, "train_f1": res["train_f1"],
                        "cpu_seconds": res["cpu_seconds"], "selected": idx == best_index})
    summary = {"selected_cell": best_index, "held_out": held_out.as_dict()}
    records.append(summary)

    if args.report_format == "json-lines":
        _emit(_format_json_lines(records), args.output)
    elif args.report_format == "csv":
        text = _format_csv(headers, rows)
        text += _format_csv(["held_out_" + name for name, _ in _report_rows(held_out)],
                            [[repr(v) for _, v in _report_rows(held_out)]])
        _emit(text, args.output)
    else:
        text = _format_table(headers, rows)
        text += "\nheld-out metrics (selected cell):\n"
        text += _format_table(["metric", "value"],
                              [(name, f"{100 * v:.1f}") for name, v in _report_rows(held_out)])
        _emit(text, args.output)
    return 0


_HANDLERS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _merge_config(argv)
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except InvalidInputError as exc:
        print(f"error[invalid-input]: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error[numerical]: {exc}", file=sys.stderr)
        return 2
    except (ModelFileError, OSError) as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 3
    except SdgsError as exc:
        print(f"error[invalid-input]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
