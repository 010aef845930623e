"""Dataset loading and results-bundle writing."""

from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from kernmobo.acquisition import geometric_mean
from kernmobo.exceptions import (
    DuplicateSmiles,
    EmptyFile,
    MissingColumn,
    NegativeInput,
    ParseError,
)

logger = logging.getLogger(__name__)


def load_smiles_file(path) -> list[str]:
    """Read one SMILES per line.

    Blank lines and ``#`` comments are skipped, anything after the first
    whitespace (a molecule name) is dropped, and later duplicates are removed
    with a logged count.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    out: list[str] = []
    seen: set[str] = set()
    duplicates = 0
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        smi = line.split()[0]
        if smi in seen:
            duplicates += 1
            continue
        seen.add(smi)
        out.append(smi)
    if duplicates:
        logger.warning("%s: removed %d duplicate SMILES", path, duplicates)
    if not out:
        raise EmptyFile(f"{path} contains no SMILES")
    return out


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: cannot parse {text!r} as a number", line) from None


def load_objectives_csv(path, columns: Sequence[str]) -> dict[str, np.ndarray | None]:
    """Map SMILES to objective vectors from a CSV with a header row.

    The SMILES column is found case-insensitively; objective columns must match
    exactly. Rows with any non-finite value map to ``None`` (missing). A SMILES
    listed twice with different values raises :class:`DuplicateSmiles`.
    """
    columns = list(columns)
    if not columns:
        raise MissingColumn("no objective columns requested")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        lowered = [h.lower() for h in header]
        if "smiles" not in lowered:
            raise MissingColumn(f"{path}: no 'smiles' column in header {header}")
        smi_col = lowered.index("smiles")
        missing = [c for c in columns if c not in header]
        if missing:
            raise MissingColumn(f"{path}: missing objective columns {missing}")
        idx = [header.index(c) for c in columns]

        table: dict[str, np.ndarray | None] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line_no)
            smi = row[smi_col].strip()
            values = np.array([_parse_float(row[j].strip(), line_no, c) for j, c in zip(idx, columns)])
            value = values if np.all(np.isfinite(values)) else None
            if smi in table:
                prev = table[smi]
                same = (prev is None and value is None) or (
                    prev is not None and value is not None and np.array_equal(prev, value))
                if not same:
                    raise DuplicateSmiles(f"{path} line {line_no}: {smi!r} listed with conflicting values")
                continue
            table[smi] = value
    return table


def load_points_csv(path) -> np.ndarray:
    """Numeric CSV of objective points; a non-numeric first row is taken as a header."""
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if line_no == 1 and not rows:
                    continue
                raise ParseError(f"non-numeric field in {row}", line_no) from None
    if not rows:
        raise EmptyFile(f"{path} has no points")
    if len({len(r) for r in rows}) != 1:
        raise ParseError("rows have different numbers of columns", None)
    return np.array(rows, dtype=float)


def load_training_csv(path) -> tuple[list[str], np.ndarray]:
    """``smiles,y`` training table (first non-SMILES column is the target)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        lowered = [h.lower() for h in header]
        if "smiles" not in lowered:
            raise MissingColumn(f"{path}: no 'smiles' column in header {header}")
        s_col = lowered.index("smiles")
        others = [i for i in range(len(header)) if i != s_col]
        if not others:
            raise MissingColumn(f"{path}: no target column")
        y_col = others[0]
        smiles, ys = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            smiles.append(row[s_col].strip())
            ys.append(_parse_float(row[y_col].strip(), line_no, header[y_col]))
    if not smiles:
        raise EmptyFile(f"{path} has no data rows")
    return smiles, np.array(ys)


def fmt_float(x: float) -> str:
    """Shortest round-trip representation (always at least 12 significant digits of precision)."""
    return repr(float(x))


def _gmean_or_nan(values) -> float:
    try:
        return geometric_mean(values)
    except NegativeInput:
        return math.nan


def write_results(result, out_dir) -> dict[str, Path]:
    """Write ``iterations.jsonl``, ``summary.csv`` and ``pareto.csv`` for one run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d = result.front.points.shape[1]
    paths = {name: out / name for name in ("iterations.jsonl", "summary.csv", "pareto.csv")}

    with paths["iterations.jsonl"].open("w", encoding="utf-8", newline="\n") as fh:
        for rec in result.records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")

    with paths["summary.csv"].open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "chosen_smiles", "acquisition",
                         *[f"f_{k + 1}" for k in range(d)], "gmean", "hv_fixed_ref"])
        for rec in result.records:
            writer.writerow([rec.iteration, rec.smiles, fmt_float(rec.acquisition),
                             *[fmt_float(v) for v in rec.observed],
                             fmt_float(_gmean_or_nan(rec.observed)), fmt_float(rec.hv_fixed_ref)])

    with paths["pareto.csv"].open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["smiles", *[f"f_{k + 1}" for k in range(d)]])
        for smi, point in zip(result.front_smiles, result.front.points):
            writer.writerow([smi, *[fmt_float(v) for v in point]])
    return paths
