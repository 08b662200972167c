"""Command-line interface.

Subcommands: simulate, train, predict, eval, benchmark, mnist, export-csv.
All randomness flows from --seed; reruns with identical inputs produce
byte-identical output files.  Exit codes: 0 success, 1 domain or parse
errors (including usage), 2 numeric failures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import dataio, idx
from .basis import BasisOrder
from .errors import DomainError, FdnetError, NumericError
from .evaluation import (
    EvalConfig,
    benchmark,
    confusion_matrix,
    misclassification_rate,
    truncated_kl_risk,
)
from .network import _forward_pass, softmax
from .projection import Dataset, project_batch
from .simulation import generate_dataset, get_model
from .training import TrainConfig, select


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the CLI contract is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _sibling_path(path: str, tag: str) -> str:
    stem, dot, ext = path.rpartition(".")
    if dot:
        return f"{stem}.{tag}.{ext}"
    return f"{path}.{tag}"


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        seed=args.seed,
    )


def _project_for_model(dataset: Dataset, input_dim: int) -> np.ndarray:
    order = BasisOrder(dataset.grid.d)
    return project_batch(dataset.values, dataset.grid, order, input_dim)


def _cmd_simulate(args) -> int:
    model = get_model(args.model)
    train_ds = generate_dataset(model, args.nk, m=args.m, seed=args.seed, subset="train")
    dataio.save_dataset(train_ds, args.out)
    print(f"wrote {len(train_ds)} training samples to {args.out}")
    if args.test_nk:
        test_ds = generate_dataset(model, args.test_nk, m=args.m, seed=args.seed, subset="test")
        test_path = _sibling_path(args.out, "test")
        dataio.save_dataset(test_ds, test_path)
        print(f"wrote {len(test_ds)} test samples to {test_path}")
    return 0


def _run_selection(dataset: Dataset, grid_path: str, cfg: TrainConfig, out: str) -> int:
    grid = dataio.load_hypergrid(grid_path)
    order = BasisOrder(dataset.grid.d)
    result = select(dataset, order, grid, cfg)
    meta = dataio.metadata_for(result.chosen, cfg, cfg.seed, {"grid_shape": list(dataset.grid.shape)})
    dataio.save_model(result.final_params, out, metadata=meta)
    c = result.chosen
    print(
        f"chosen J={c.n_scores} L={c.depth} width={c.width} dropout={c.dropout}; "
        f"validation error {result.validation_errors.min():.4f}; model written to {out}"
    )
    return 0


def _cmd_train(args) -> int:
    dataset = dataio.load_dataset(args.data)
    if dataset.labels.min() < 1:
        raise DomainError("training data contains unlabeled samples")
    return _run_selection(dataset, args.grid, _train_config(args), args.out)


def _cmd_predict(args) -> int:
    params, _ = dataio.load_model(args.model)
    dataset = dataio.load_dataset(args.data)
    scores = _project_for_model(dataset, params.architecture.input_dim)
    _, _, logits = _forward_pass(params, scores)
    probs = softmax(logits)
    preds = np.argmax(probs, axis=1) + 1
    dataio.write_predictions_csv(range(len(dataset)), preds, probs, args.out)
    print(f"wrote {len(dataset)} predictions to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    params, _ = dataio.load_model(args.model)
    dataset = dataio.load_dataset(args.data)
    if dataset.labels.min() < 1:
        raise DomainError("evaluation data contains unlabeled samples")
    scores = _project_for_model(dataset, params.architecture.input_dim)
    _, _, logits = _forward_pass(params, scores)
    probs = softmax(logits)
    preds = np.argmax(probs, axis=1) + 1
    err = misclassification_rate(preds, dataset.labels)
    conf = confusion_matrix(preds, dataset.labels, dataset.n_classes)
    print(f"error rate: {err:.6f}")
    print("confusion matrix (rows = true class, columns = predicted):")
    for row in conf:
        print("  " + " ".join(f"{c:6d}" for c in row))
    if args.c0 is not None:
        onehot = np.zeros_like(probs)
        onehot[np.arange(len(dataset)), dataset.labels - 1] = 1.0
        tce = truncated_kl_risk(onehot, probs, args.c0)
        print(f"truncated cross-entropy (C0={args.c0}): {tce:.6f}")
    return 0


def _cmd_benchmark(args) -> int:
    model = get_model(args.model_id)
    grid = dataio.load_hypergrid(args.grid)
    cfg = _train_config(args)
    eval_cfg = EvalConfig(replicates=args.reps, seed=args.seed)
    report = benchmark(
        model,
        args.nk,
        args.m,
        grid,
        cfg,
        eval_cfg,
        test_per_class=args.test_nk,
        workers=args.workers,
    )
    dataio.write_benchmark_csv(report, args.out)
    sd = f"{report.sd:.4f}" if report.sd is not None else "n/a"
    print(
        f"{report.model_id} n_k={report.n_per_class} m={report.m}: "
        f"mean error {report.mean_error:.4f} (sd {sd}) over {report.replicates} replicates"
    )
    if report.kl_mean is not None:
        print(f"truncated KL risk (mean): {report.kl_mean:.4f}")
    print(f"report written to {args.out}")
    return 0


def _cmd_mnist(args) -> int:
    dataset = idx.load_idx(args.images, args.labels)
    if args.limit:
        dataset = Dataset(
            values=dataset.values[: args.limit],
            grid=dataset.grid,
            labels=dataset.labels[: args.limit],
            n_classes=dataset.n_classes,
        )
    code = _run_selection(dataset, args.grid, _train_config(args), args.out)
    if args.test_images and args.test_labels:
        params, _ = dataio.load_model(args.out)
        test = idx.load_idx(args.test_images, args.test_labels)
        if args.test_limit:
            test = Dataset(
                values=test.values[: args.test_limit],
                grid=test.grid,
                labels=test.labels[: args.test_limit],
                n_classes=test.n_classes,
            )
        scores = _project_for_model(test, params.architecture.input_dim)
        _, _, logits = _forward_pass(params, scores)
        preds = np.argmax(logits, axis=1) + 1
        err = misclassification_rate(preds, test.labels)
        print(f"test accuracy: {1.0 - err:.4f} on {len(test)} samples")
    return code


def _cmd_export_csv(args) -> int:
    dataset = dataio.load_dataset(args.data)
    dataio.dataset_to_csv(dataset, args.out)
    print(f"wrote {len(dataset)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fdnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic benchmark dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--nk", type=int, required=True, help="training samples per class")
    p.add_argument("--m", type=int, required=True, help="sampling frequency (grid points)")
    p.add_argument("--test-nk", type=int, default=0, help="also write a test set of this size")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="select hyperparameters and train on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", required=True, help="JSON file of candidate lists")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="write per-sample predictions to CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="print error rate and confusion matrix")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--c0", type=float, default=None, help="also report truncated cross-entropy")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("benchmark", help="replicated end-to-end benchmark of one model")
    p.add_argument("--model-id", required=True)
    p.add_argument("--nk", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--test-nk", type=int, default=None)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("mnist", help="train on IDX image data end to end")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--test-images")
    p.add_argument("--test-labels")
    p.add_argument("--limit", type=int, default=0, help="use only the first N training images")
    p.add_argument("--test-limit", type=int, default=0)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-3)
    p.set_defaults(func=_cmd_mnist)

    p = sub.add_parser("export-csv", help="dump a dataset file to readable CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_csv)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except (FdnetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
