"""File formats: CSV datasets and reports, JSON models and partitions, PGM images."""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .belief import pignistic_matrix
from .datagen import LabeledDataset
from .errors import DataError, ParameterError
from .partition import EvidentialPartition, HardEvidentialView


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _label_value(v):
    """Integer labels stay integers; anything else stays a string."""
    try:
        f = float(v)
    except ValueError:
        return v
    return int(f) if f.is_integer() else v


def read_dataset_csv(
    path,
    label_column: str | None = None,
    standardize: bool = False,
) -> LabeledDataset:
    """Load a comma-separated file with a header row.

    Every column except ``label_column`` must be numeric. With
    ``standardize`` the features are z-scored (columns with zero spread
    are only centred).
    """
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [r for r in reader if any(c.strip() for c in r)]
    if label_column is not None and label_column not in header:
        raise ParameterError(f"{path}: no column named {label_column!r}")
    feat_idx = [i for i, h in enumerate(header) if h != label_column]
    if not feat_idx:
        raise DataError(f"{path}: no feature columns")
    X = np.empty((len(rows), len(feat_idx)))
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r + 2} has {len(row)} fields, expected {len(header)}")
        for c, i in enumerate(feat_idx):
            try:
                X[r, c] = float(row[i])
            except ValueError:
                raise DataError(
                    f"{path}: row {r + 2}, column {header[i]!r}: {row[i]!r} is not numeric"
                ) from None
    if not np.all(np.isfinite(X)):
        raise DataError(f"{path}: non-finite feature values")
    if standardize and len(rows):
        sd = X.std(axis=0)
        X = (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    labels = None
    if label_column is not None:
        li = header.index(label_column)
        labels = np.array([_label_value(row[li].strip()) for row in rows])
    return LabeledDataset(
        X,
        labels,
        feature_names=tuple(header[i] for i in feat_idx),
        label_name=label_column or "label",
    )


def write_dataset_csv(ds: LabeledDataset, path) -> None:
    header = list(ds.feature_names)
    if ds.labels is not None:
        header.append(ds.label_name)
    rows = []
    for i in range(ds.N):
        row = [_num(v) for v in ds.X[i]]
        if ds.labels is not None:
            row.append(_num(ds.labels[i]))
        rows.append(row)
    write_csv(path, header, rows)


def write_csv(path, header, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def read_labels_csv(path, column: str = "label") -> np.ndarray:
    """Read one column of a CSV file as a label vector."""
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ParameterError(f"{path}: no column named {column!r}")
        return np.array([_label_value(r[column].strip()) for r in reader])


def write_json(obj, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"no such file: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc


def read_partition_json(path) -> EvidentialPartition:
    return EvidentialPartition.from_dict(read_json(path))


def write_partition_csv(p: EvidentialPartition, path) -> None:
    """One row per object: best focal set, its mass, every mass, BetP vector."""
    s = p.structure
    labels = s.labels()
    bet = pignistic_matrix(p.masses, s)
    best = p.masses.argmax(axis=1)
    header = (
        ["object", "best_set", "best_mass"]
        + [f"m{lab}" for lab in labels]
        + [f"betp_{k + 1}" for k in range(s.C)]
    )
    rows = [
        [i + 1, labels[best[i]], p.masses[i, best[i]], *p.masses[i], *bet[i]]
        for i in range(p.N)
    ]
    write_csv(path, header, rows)


def write_view_csv(view: HardEvidentialView, hardened: np.ndarray, path) -> None:
    """Per object: best focal set, lower/upper membership flags, hardened label."""
    s = view.structure
    lower = view.lower_matrix()
    upper = view.upper_matrix()
    header = (
        ["object", "best_set"]
        + [f"lower_{k + 1}" for k in range(s.C)]
        + [f"upper_{k + 1}" for k in range(s.C)]
        + ["label"]
    )
    rows = [
        [i + 1, s.label(int(view.best[i])), *lower[i].astype(int), *upper[i].astype(int), hardened[i]]
        for i in range(view.N)
    ]
    write_csv(path, header, rows)


def write_labels_csv(labels, path, name: str = "label") -> None:
    write_csv(path, ["object", name], [[i + 1, v] for i, v in enumerate(labels)])


def write_pgm(image: np.ndarray, path, lo: float | None = None, hi: float | None = None) -> None:
    """Write a 2-D array as an 8-bit binary PGM, mapping [lo, hi] to [0, 255]."""
    img = np.asarray(image, dtype=float)
    lo = img.min() if lo is None else lo
    hi = img.max() if hi is None else hi
    scaled = np.zeros_like(img) if hi <= lo else (img - lo) / (hi - lo)
    data = np.clip(np.rint(scaled * 255), 0, 255).astype(np.uint8)
    h, w = data.shape
    with Path(path).open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary PGM back into [0, 1]."""
    raw = Path(path).read_bytes()
    # one whitespace byte separates maxval from the pixels, which may themselves look like whitespace
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if m is None:
        raise DataError(f"{path}: not a binary PGM file")
    w, h, maxval = map(int, m.groups())
    if maxval > 255 or len(raw) - m.end() < w * h:
        raise DataError(f"{path}: truncated or 16-bit PGM")
    data = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=m.end())
    return data.reshape(h, w).astype(float) / maxval
