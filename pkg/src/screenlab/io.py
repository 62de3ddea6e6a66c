"""File formats: dataset CSV, RepTable CSV/JSON, JSON reports.

Dataset CSV
    Header row required. Columns ``z`` (0/1), ``d`` (0/1) and ``y`` (real)
    are mandatory; ``stated_complier`` (0/1) and ``true_type`` (c/a/n) are
    optional. Written in that order. Floats use Python's shortest
    round-trip repr, so a written sample re-reads bit for bit.

RepTable CSV
    ``rep_index,mechanism,beta_hat,pi_hat,se,retention_fraction,
    sign_screen_pass,discarded,reason``; booleans as 0/1, missing values
    as ``nan``.

Every JSON document carries ``schema_version``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .dgp import DgpKind, Sample, UnitType
from .errors import SchemaError
from .montecarlo import REP_COLUMNS, RepTable

SCHEMA_VERSION = "1.0"
DATASET_COLUMNS = ("z", "d", "y", "stated_complier", "true_type")
REQUIRED_COLUMNS = ("z", "d", "y")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _parse_flag(text: str, row: int, column: str) -> int:
    if text not in ("0", "1"):
        raise SchemaError(f"expected 0 or 1, got {text!r}", row, column)
    return int(text)


def _parse_real(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SchemaError(f"expected a real number, got {text!r}", row, column) from None
    if not math.isfinite(value):
        raise SchemaError(f"expected a finite number, got {text!r}", row, column)
    return value


def write_dataset(sample: Sample, path) -> None:
    d = np.asarray(sample.d)
    if not np.isin(d, (0, 1)).all():
        raise SchemaError("dataset CSV needs a binary treatment column d")
    cols = ["z", "d", "y"]
    if sample.stated_complier is not None:
        cols.append("stated_complier")
    if sample.true_type is not None:
        cols.append("true_type")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(sample)):
            fields = [str(int(sample.z[i])), str(int(d[i])), repr(float(sample.y[i]))]
            if sample.stated_complier is not None:
                fields.append("1" if sample.stated_complier[i] else "0")
            if sample.true_type is not None:
                fields.append(UnitType(int(sample.true_type[i])).char)
            fh.write(",".join(fields) + "\n")


def read_dataset(path) -> Sample:
    """Read and validate a dataset CSV; any bad field aborts with its row."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError("file is empty; a header row is required") from None
        unknown = [h for h in header if h not in DATASET_COLUMNS]
        if unknown:
            raise SchemaError(f"unknown column {unknown[0]!r}", 1)
        if len(set(header)) != len(header):
            raise SchemaError("duplicate column in header", 1)
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"missing required column {missing[0]!r}", 1)
        pos = {name: header.index(name) for name in header}
        z, d, y, stated, types = [], [], [], [], []
        for rowno, fields in enumerate(reader, start=2):
            if len(fields) != len(header):
                raise SchemaError(f"expected {len(header)} fields, got {len(fields)}", rowno)
            f = [x.strip() for x in fields]
            z.append(_parse_flag(f[pos["z"]], rowno, "z"))
            d.append(_parse_flag(f[pos["d"]], rowno, "d"))
            y.append(_parse_real(f[pos["y"]], rowno, "y"))
            if "stated_complier" in pos:
                stated.append(_parse_flag(f[pos["stated_complier"]], rowno, "stated_complier"))
            if "true_type" in pos:
                try:
                    types.append(UnitType.from_char(f[pos["true_type"]]))
                except ValueError as err:
                    raise SchemaError(str(err), rowno, "true_type") from None
    if not z:
        raise SchemaError("dataset has no data rows")
    return Sample(
        z=np.array(z, dtype=np.int8),
        d=np.array(d, dtype=np.int8),
        y=np.array(y, dtype=np.float64),
        dgp_kind=DgpKind.DISCRETE if types else None,
        true_type=np.array(types, dtype=np.int8) if types else None,
        stated_complier=np.array(stated, dtype=bool) if stated else None,
    )


def write_rep_table_csv(table: RepTable, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(REP_COLUMNS) + "\n")
        for row in table.rows:
            fh.write(",".join(_fmt(getattr(row, c)) for c in REP_COLUMNS) + "\n")


def read_rep_table_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def to_jsonable(obj):
    """Convert dataclasses, enums and numpy scalars; NaN/inf become null."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(obj.to_dict() if hasattr(obj, "to_dict") else asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(doc: dict, path=None) -> str:
    text = json.dumps({"schema_version": SCHEMA_VERSION, **to_jsonable(doc)}, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def write_rep_table_json(table: RepTable, path) -> None:
    dump_json({"columns": list(REP_COLUMNS), "rows": [asdict(r) for r in table.rows]}, path)
