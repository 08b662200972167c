"""Serialization: binary dataset files, JSON model files, CSV reports.

Dataset files are binary (3-D datasets reach 10^5+ values per file and CSV
parsing would dominate runtime); `dataset_to_csv` provides a readable dump
when needed.  All writers are deterministic: identical inputs produce
byte-identical files.

Dataset file layout (little-endian):

    magic   5 bytes  b"MFDN1"
    version u32      1
    d       u32      1..3
    shape   d * u32  per-axis point counts
    K       u32      number of classes
    n       u64      number of samples
    payload n records of { label u8 (0 = unlabeled, else 1..K),
                           m float64 values, row-major }
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .basis import midpoint_grid
from .errors import DomainError, FormatError
from .network import Architecture, NetworkParams
from .projection import Dataset
from .training import Chosen, HyperGrid

DATASET_MAGIC = b"MFDN1"
DATASET_VERSION = 1
MODEL_FORMAT = "fdnet-model"
MODEL_VERSION = 1

BENCHMARK_COLUMNS = (
    "model_id",
    "n_k",
    "m",
    "replicates",
    "mean_error",
    "sd",
    "se",
    "chosen_J",
    "chosen_L",
    "chosen_width",
    "chosen_dropout",
)


def save_dataset(dataset: Dataset, path) -> None:
    shape = dataset.grid.shape
    if dataset.n_classes > 255:
        raise DomainError("dataset format stores labels as one byte; K must be <= 255")
    header = DATASET_MAGIC + struct.pack(
        f"<II{len(shape)}IIQ",
        DATASET_VERSION,
        len(shape),
        *shape,
        dataset.n_classes,
        len(dataset),
    )
    m = dataset.grid.m
    record = np.dtype([("label", "u1"), ("values", "<f8", (m,))])
    payload = np.empty(len(dataset), dtype=record)
    payload["label"] = dataset.labels.astype(np.uint8)
    payload["values"] = dataset.values
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def _need(buf: bytes, offset: int, count: int, what: str) -> None:
    if offset + count > len(buf):
        raise FormatError(f"file truncated while reading {what}", offset)


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        buf = fh.read()
    offset = 0
    _need(buf, offset, 5, "magic")
    if buf[:5] != DATASET_MAGIC:
        raise FormatError(f"bad magic {buf[:5]!r}, expected {DATASET_MAGIC!r}", 0)
    offset = 5
    _need(buf, offset, 8, "version and dimension")
    version, d = struct.unpack_from("<II", buf, offset)
    if version != DATASET_VERSION:
        raise FormatError(f"unsupported format version {version}", offset)
    offset += 4
    if not 1 <= d <= 3:
        raise FormatError(f"dimension must be 1..3, got {d}", offset)
    offset += 4
    _need(buf, offset, 4 * d, "grid shape")
    shape = struct.unpack_from(f"<{d}I", buf, offset)
    offset += 4 * d
    if any(s < 1 or s > 1_000_000 for s in shape):
        raise FormatError(f"implausible grid shape {shape}", offset - 4 * d)
    _need(buf, offset, 12, "class count and sample count")
    n_classes, n = struct.unpack_from("<IQ", buf, offset)
    if not 1 <= n_classes <= 255:
        raise FormatError(f"class count must be 1..255, got {n_classes}", offset)
    offset += 12

    m = int(np.prod(shape))
    expected = n * (1 + 8 * m)
    actual = len(buf) - offset
    if actual < expected:
        raise FormatError(
            f"payload holds {actual} bytes, header promises {expected}", offset
        )
    if actual > expected:
        raise FormatError(f"{actual - expected} trailing bytes after payload", offset + expected)

    if n == 0:
        values = np.empty((0, m))
        labels = np.empty(0, dtype=np.int64)
    else:
        record = np.dtype([("label", "u1"), ("values", "<f8", (m,))])
        payload = np.frombuffer(buf, dtype=record, count=n, offset=offset)
        labels = payload["label"].astype(np.int64)
        values = payload["values"].astype(np.float64)
    if labels.size and labels.max() > n_classes:
        bad = int(np.argmax(labels > n_classes))
        raise FormatError(
            f"label {int(labels[bad])} exceeds class count {n_classes}",
            offset + bad * (1 + 8 * m),
        )
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.all(np.isfinite(values), axis=1)))
        raise FormatError("non-finite sample values", offset + bad * (1 + 8 * m) + 1)
    return Dataset(
        values=values,
        grid=midpoint_grid(shape),
        labels=labels,
        n_classes=n_classes,
    )


def save_model(params: NetworkParams, path, metadata: dict | None = None) -> None:
    """Write a model as JSON; round-trips bit-exactly for finite values."""
    arch = params.architecture
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "architecture": {
            "input_dim": arch.input_dim,
            "hidden_widths": list(arch.hidden_widths),
            "n_classes": arch.n_classes,
        },
        "weights": [
            {"shape": list(w.shape), "data": w.ravel().tolist()} for w in params.weights
        ],
        "shifts": [
            {"shape": list(v.shape), "data": v.ravel().tolist()} for v in params.shifts
        ],
        "metadata": metadata or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path):
    """Read a model file; returns (NetworkParams, metadata dict)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise FormatError(f"not a model file (format field {doc.get('format')!r})")
    if doc.get("version") != MODEL_VERSION:
        raise FormatError(f"unsupported model version {doc.get('version')!r}")
    try:
        arch = Architecture(
            input_dim=int(doc["architecture"]["input_dim"]),
            hidden_widths=tuple(doc["architecture"]["hidden_widths"]),
            n_classes=int(doc["architecture"]["n_classes"]),
        )
        weights = [_decode_array(entry) for entry in doc["weights"]]
        shifts = [_decode_array(entry) for entry in doc["shifts"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model document: {exc}") from exc
    params = NetworkParams(weights=weights, shifts=shifts)
    got = params.architecture
    if got != arch:
        raise FormatError("declared architecture does not match the stored arrays")
    return params, doc.get("metadata", {})


def _decode_array(entry) -> np.ndarray:
    shape = tuple(int(s) for s in entry["shape"])
    data = np.asarray(entry["data"], dtype=float)
    if data.size != int(np.prod(shape)):
        raise ValueError(f"array data length {data.size} does not match shape {shape}")
    return data.reshape(shape)


def load_hypergrid(path) -> HyperGrid:
    """Parse candidate lists from JSON: {"J": [...], "L": [...],
    "width": [...], "dropout": [...]}."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"hyperparameter grid is not valid JSON: {exc}") from exc
    missing = {"J", "L", "width", "dropout"} - set(doc)
    if missing:
        raise FormatError(f"hyperparameter grid is missing key(s) {sorted(missing)}")
    try:
        return HyperGrid(
            n_scores=tuple(int(j) for j in doc["J"]),
            depths=tuple(int(l) for l in doc["L"]),
            widths=tuple(int(w) for w in doc["width"]),
            dropouts=tuple(float(s) for s in doc["dropout"]),
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(f"malformed hyperparameter grid: {exc}") from exc


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_benchmark_csv(report, path) -> None:
    """One summary row (modal chosen tuple) followed by one row per replicate."""
    from .evaluation import modal_chosen

    rows = [",".join(BENCHMARK_COLUMNS)]
    summary_choice = modal_chosen(report.chosen)
    rows.append(
        ",".join(
            _fmt(x)
            for x in (
                report.model_id,
                report.n_per_class,
                report.m,
                report.replicates,
                report.mean_error,
                report.sd,
                report.se,
                summary_choice.n_scores,
                summary_choice.depth,
                summary_choice.width,
                summary_choice.dropout,
            )
        )
    )
    for err, choice in zip(report.errors, report.chosen):
        rows.append(
            ",".join(
                _fmt(x)
                for x in (
                    report.model_id,
                    report.n_per_class,
                    report.m,
                    1,
                    float(err),
                    None,
                    None,
                    choice.n_scores,
                    choice.depth,
                    choice.width,
                    choice.dropout,
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(rows) + "\n")


def write_predictions_csv(indices, predictions, probabilities, path) -> None:
    """CSV of index, predicted class, and per-class probabilities."""
    probabilities = np.asarray(probabilities)
    k = probabilities.shape[1]
    header = "index,predicted," + ",".join(f"p{j + 1}" for j in range(k))
    rows = [header]
    for i, pred, probs in zip(indices, predictions, probabilities):
        rows.append(f"{i},{pred}," + ",".join(repr(float(p)) for p in probs))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(rows) + "\n")


def dataset_to_csv(dataset: Dataset, path) -> None:
    """Readable dump: index, label, then the m sample values."""
    m = dataset.grid.m
    header = "index,label," + ",".join(f"v{j}" for j in range(m))
    rows = [header]
    for i in range(len(dataset)):
        vals = ",".join(repr(float(v)) for v in dataset.values[i])
        rows.append(f"{i},{int(dataset.labels[i])},{vals}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(rows) + "\n")


def metadata_for(chosen: Chosen, cfg, seed: int, extra: dict | None = None) -> dict:
    """Standard training metadata recorded into model files."""
    meta = {
        "seed": seed,
        "chosen": {
            "J": chosen.n_scores,
            "L": chosen.depth,
            "width": chosen.width,
            "dropout": chosen.dropout,
        },
        "config": {
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "optimizer": cfg.optimizer,
        },
    }
    if extra:
        meta.update(extra)
    return meta
