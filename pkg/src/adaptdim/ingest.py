from __future__ import annotations

import csv
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import InputError
from .metric import MetricSample, from_distances, from_points

InputFormat = Literal["auto", "points", "matrix"]


def _read_rows(path: Path) -> list[list[str]]:
    try:
        with path.open(newline="", encoding="utf-8-sig") as f:
            rows = [[cell.strip() for cell in row] for row in csv.reader(f)]
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from e
    rows = [r for r in rows if any(r)]
    if not rows:
        raise InputError(f"empty sample: {path} has no rows")
    return rows


def _float(value: str, *, path: Path, row: int) -> float:
    try:
        return float(value)
    except ValueError as e:
        raise InputError(f"{path}:{row}: not a number: {value!r}") from e


def _label(value: str, *, path: Path, row: int) -> int:
    try:
        y = float(value)
    except ValueError as e:
        raise InputError(f"{path}:{row}: label must be -1 or +1, got {value!r}") from e
    if y not in (-1.0, 1.0):
        raise InputError(f"{path}:{row}: label must be -1 or +1, got {value!r}")
    return int(y)


def _unique_ids(ids: list[str], path: Path) -> None:
    seen: set[str] = set()
    for pid in ids:
        if not pid:
            raise InputError(f"{path}: empty id")
        if pid in seen:
            raise InputError(f"{path}: duplicate id {pid!r}")
        seen.add(pid)


def read_labels(path: Path) -> dict[str, int]:
    """`id,label` file (header optional)."""
    rows = _read_rows(path)
    if rows[0] and rows[0][0].lower() == "id":
        rows = rows[1:]
    out: dict[str, int] = {}
    for n, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise InputError(f"{path}:{n}: expected id,label")
        out[row[0]] = _label(row[1], path=path, row=n)
    return out


def _looks_like_matrix(rows: list[list[str]]) -> bool:
    header = rows[0][1:]
    firsts = [r[0] for r in rows[1:]]
    return bool(header) and set(header) == set(firsts)


def read_sample(
    path: Path, *, fmt: InputFormat = "auto", labels_path: Path | None = None
) -> MetricSample:
    rows = _read_rows(path)
    if fmt == "auto":
        fmt = "matrix" if _looks_like_matrix(rows) else "points"
    sample = _read_matrix(path, rows) if fmt == "matrix" else _read_points(path, rows)

    if labels_path is not None:
        table = read_labels(labels_path)
        missing = [pid for pid in sample.ids if pid not in table]
        if missing:
            raise InputError(f"{labels_path}: no label for id(s) {', '.join(missing[:5])}")
        y = np.array([table[pid] for pid in sample.ids], dtype=float)
        if sample.coords is not None:
            sample = from_points(sample.ids, sample.coords, y)
        else:
            sample = from_distances(sample.ids, sample.distances, y)
    return sample


def _read_points(path: Path, rows: list[list[str]]) -> MetricSample:
    header = [h.lower() for h in rows[0]]
    if not header or header[0] != "id":
        raise InputError(f"{path}: points CSV must start with header id,x1,...")
    has_label = header[-1] == "label"
    width = len(header)
    dims = width - 1 - int(has_label)
    if dims < 1:
        raise InputError(f"{path}: points CSV needs at least one coordinate column")

    ids: list[str] = []
    coords: list[list[float]] = []
    labels: list[int] = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise InputError(f"{path}:{n}: expected {width} columns, got {len(row)}")
        ids.append(row[0])
        coords.append([_float(v, path=path, row=n) for v in row[1 : 1 + dims]])
        if has_label:
            labels.append(_label(row[-1], path=path, row=n))
    if not ids:
        raise InputError("empty sample")
    _unique_ids(ids, path)
    y = np.array(labels, dtype=float) if has_label else None
    return from_points(ids, np.array(coords, dtype=float), y)


def _read_matrix(path: Path, rows: list[list[str]]) -> MetricSample:
    header = rows[0][1:]
    body = rows[1:]
    ids = [r[0] for r in body]
    if not body or len(header) != len(body) or header != ids:
        raise InputError(
            "malformed distances",
            details=f"{path}: header ids must equal the first column, in order",
        )
    _unique_ids(ids, path)
    n = len(ids)
    matrix = np.empty((n, n), dtype=float)
    for i, row in enumerate(body):
        if len(row) != n + 1:
            raise InputError("malformed distances", details=f"{path}:{i + 2}: row length")
        matrix[i] = [_float(v, path=path, row=i + 2) for v in row[1:]]
    return from_distances(ids, matrix)


def write_points(path: Path, sample: MetricSample) -> None:
    """Inverse of the points reader; used for fixtures and sample data."""
    if sample.coords is None:
        raise InputError("sample has no coordinates")
    dims = sample.coords.shape[1]
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        header = ["id"] + [f"x{k + 1}" for k in range(dims)]
        if sample.labels is not None:
            header.append("label")
        w.writerow(header)
        for i, pid in enumerate(sample.ids):
            row = [pid] + [repr(float(v)) for v in sample.coords[i]]
            if sample.labels is not None:
                row.append(str(int(sample.labels[i])))
            w.writerow(row)


def read_query_distances(
    path: Path, anchor_ids: list[str] | tuple[str, ...]
) -> tuple[list[str], np.ndarray]:
    """`id,<anchor ids...>` CSV of query-to-anchor distances, columns reordered to `anchor_ids`."""
    rows = _read_rows(path)
    header = rows[0][1:]
    missing = [a for a in anchor_ids if a not in header]
    if missing:
        raise InputError(f"{path}: no distance column for anchor(s) {', '.join(missing[:5])}")
    order = [header.index(a) + 1 for a in anchor_ids]
    ids: list[str] = []
    matrix = np.empty((len(rows) - 1, len(anchor_ids)), dtype=float)
    for k, row in enumerate(rows[1:]):
        n = k + 2
        if len(row) != len(header) + 1:
            raise InputError(f"{path}:{n}: expected {len(header) + 1} columns, got {len(row)}")
        ids.append(row[0])
        matrix[k] = [_float(row[c], path=path, row=n) for c in order]
    if not ids:
        raise InputError("empty sample")
    if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
        raise InputError(
            "malformed distances", details=f"{path}: distances must be finite and >= 0"
        )
    return ids, matrix
