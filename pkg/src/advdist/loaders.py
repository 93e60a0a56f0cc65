"""Model and dataset loading with validation and provenance logging."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from .errors import DataError
from .evaluation import Dataset
from .nn import Dense, Network, Relu

log = logging.getLogger(__name__)


def load_model(path: str | Path) -> Network:
    """Parse a weight file into a validated Network.

    Expected document: {"num_classes": n, "layers": [...]} where each layer is
    {"type": "dense", "weights": [[...], ...], "bias": [...]} with weight row i
    holding output neuron i, or {"type": "relu"}. Layer-level problems name the
    offending layer index; the raw-byte checksum is logged for provenance.
    """
    path = Path(path)
    raw = path.read_bytes()
    log.info("loading model %s (sha256=%s)", path, hashlib.sha256(raw).hexdigest())
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "layers" not in doc or "num_classes" not in doc:
        raise DataError(f"{path}: expected an object with 'num_classes' and 'layers'")

    layers: list[Dense | Relu] = []
    for i, entry in enumerate(doc["layers"]):
        kind = entry.get("type") if isinstance(entry, dict) else None
        if kind == "relu":
            layers.append(Relu())
        elif kind == "dense":
            try:
                weights = np.asarray(entry["weights"], dtype=np.float64)
                bias = np.asarray(entry["bias"], dtype=np.float64)
            except (KeyError, ValueError) as exc:
                raise DataError(f"{path}: layer {i}: bad dense payload: {exc}") from exc
            if weights.ndim != 2:
                raise DataError(f"{path}: layer {i}: weights must be a 2-D matrix")
            layers.append(Dense(weights, bias))
        else:
            raise DataError(f"{path}: layer {i}: unknown layer type {kind!r}")
    return Network(layers=tuple(layers), num_classes=int(doc["num_classes"]))


def load_dataset(path: str | Path) -> Dataset:
    """Read a `label,f0,f1,...` CSV into a range-validated Dataset.

    Errors name the 1-based CSV line (the header is line 1).
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        if not header or header[0] != "label":
            raise DataError(f"{path}: header must start with 'label', got {header[:1]}")
        n_features = len(header) - 1
        if n_features < 1:
            raise DataError(f"{path}: header declares no feature columns")

        labels = []
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_features + 1:
                raise DataError(
                    f"{path}: line {line_no}: expected {n_features + 1} fields, got {len(row)}"
                )
            try:
                label = int(row[0])
                features = np.array([float(v) for v in row[1:]], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}: line {line_no}: {exc}") from exc
            if label < 0:
                raise DataError(f"{path}: line {line_no}: negative label {label}")
            bad = np.flatnonzero((features < 0.0) | (features > 1.0))
            if bad.size:
                raise DataError(
                    f"{path}: line {line_no}: feature f{bad[0]} = {features[bad[0]]} "
                    f"outside [0, 1]"
                )
            labels.append(label)
            rows.append(features)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(inputs=np.vstack(rows), labels=np.array(labels, dtype=np.int64))
