"""CSV ingestion: attribute projection, unit-cube normalization, categorical coding.

Rows with a missing selected value are dropped by default (the count is
surfaced in the report); ``missing_policy="impute-zero"`` keeps them with
the affected coordinates at 0.0.  Dates are parsed to days since
1970-01-01 and then treated as numeric.  Categorical values get a
deterministic keyed-hash coordinate in [0, 1), so a (file, spec, seed)
triple always reproduces the same cloud.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Sequence

import numpy as np

from .tree import PointCloud

KINDS = ("numeric", "categorical", "date")
MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none"})
_EPOCH = date(1970, 1, 1)
_UNIT_SCALE = float(1 << 52)
_ONE_MINUS_EPS = 1.0 - 2.0**-52


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str = "numeric"
    role: str = "selected"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown attribute kind {self.kind!r}; expected one of {KINDS}")
        if self.role not in ("selected", "ignored"):
            raise ValueError(f"unknown attribute role {self.role!r}")


def parse_attribute_specs(text: str) -> list[AttributeSpec]:
    """Parse a CLI attribute list like ``"x,y,species:categorical,when:date"``."""
    specs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, kind = part.partition(":")
        specs.append(AttributeSpec(name.strip(), kind.strip() or "numeric"))
    if not specs:
        raise ValueError("at least one attribute must be selected")
    return specs


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_kept: int = 0
    rows_dropped: int = 0
    missing_policy: str = "drop"
    seed: int = 42
    columns: list[str] = field(default_factory=list)
    distinct_values: dict[str, int] = field(default_factory=dict)
    numeric_bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    categorical_codes: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_kept": self.rows_kept,
            "rows_dropped": self.rows_dropped,
            "missing_policy": self.missing_policy,
            "seed": self.seed,
            "columns": self.columns,
            "distinct_values": self.distinct_values,
            "numeric_bounds": {k: list(v) for k, v in self.numeric_bounds.items()},
            "categorical_codes": self.categorical_codes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def normalize_numeric(values: Iterable[float], lo: float, hi: float) -> np.ndarray:
    """Affine map of [lo, hi] onto [0, 1): the maximum lands at 1 - 2**-52.

    A constant column (lo == hi) maps to all zeros.
    """
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
    if lo > hi:
        raise ValueError(f"invalid bounds: min {lo} exceeds max {hi}")
    if lo == hi:
        return np.zeros(arr.shape, np.float64)
    return (arr - lo) / (hi - lo) * _ONE_MINUS_EPS


def _hash_unit(seed: int, value: str, salt: int) -> float:
    h = hashlib.blake2b(digest_size=8, key=str(seed).encode())
    h.update(salt.to_bytes(4, "little"))
    h.update(value.encode())
    word = int.from_bytes(h.digest(), "little") >> 12  # 52 bits
    return word / _UNIT_SCALE


def encode_categorical(values: Sequence[str], seed: int) -> tuple[np.ndarray, dict[str, float]]:
    """Deterministic pseudo-random coordinate per distinct value.

    Identical (seed, value) pairs always map identically; in the rare
    event two distinct values collide, the later one (first-appearance
    order) is re-salted until free.
    """
    table: dict[str, float] = {}
    used: set[float] = set()
    for v in values:
        if v in table:
            continue
        salt = 0
        code = _hash_unit(seed, v, salt)
        while code in used:
            salt += 1
            code = _hash_unit(seed, v, salt)
        table[v] = code
        used.add(code)
    return np.array([table[v] for v in values], np.float64), table


def _parse_date(raw: str) -> float:
    return float((date.fromisoformat(raw) - _EPOCH).days)


def load_csv(
    path: str,
    specs: Sequence[AttributeSpec],
    delimiter: str = ",",
    seed: int = 42,
    missing_policy: str = "drop",
) -> tuple[PointCloud, IngestReport]:
    """Load, project and normalize a CSV file into a unit-cube point cloud.

    Point ids are the 0-based data-row ordinals of the input file (rows
    dropped for missing values leave gaps), so identities are stable
    across policies.  Error messages reference 1-based file lines.
    """
    selected = [s for s in specs if s.role == "selected"]
    if not selected:
        raise ValueError("at least one attribute must be selected")
    names = [s.name for s in selected]
    if len(set(names)) != len(names):
        raise ValueError(f"selected attributes must be distinct, got {names}")
    if missing_policy not in ("drop", "impute-zero"):
        raise ValueError(f"unknown missing policy {missing_policy!r}")

    report = IngestReport(missing_policy=missing_policy, seed=seed, columns=names)
    raw_columns: list[list[str | None]] = [[] for _ in selected]
    kept_ids: list[int] = []

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        index: dict[str, int] = {}
        for pos, col in enumerate(header):
            index.setdefault(col.strip(), pos)
        missing_cols = [s.name for s in selected if s.name not in index]
        if missing_cols:
            raise ValueError(f"{path}: column(s) not found in header: {', '.join(missing_cols)}")
        cols = [index[s.name] for s in selected]

        for row_ordinal, row in enumerate(reader):
            report.rows_read += 1
            values: list[str | None] = []
            dropped = False
            for pos in cols:
                raw = row[pos].strip() if pos < len(row) else ""
                if raw.lower() in MISSING_TOKENS:
                    if missing_policy == "drop":
                        dropped = True
                        break
                    values.append(None)
                else:
                    values.append(raw)
            if dropped:
                report.rows_dropped += 1
                continue
            kept_ids.append(row_ordinal)
            for store, value in zip(raw_columns, values):
                store.append(value)

    if not kept_ids:
        raise ValueError(f"{path}: no usable rows after applying the missing-value policy")
    report.rows_kept = len(kept_ids)

    num = len(kept_ids)
    points = np.zeros((num, len(selected)), np.float64)
    for j, spec in enumerate(selected):
        column = raw_columns[j]
        present = [v for v in column if v is not None]
        report.distinct_values[spec.name] = len(set(present))
        if spec.kind == "categorical":
            coded, table = encode_categorical(present, seed)
            report.categorical_codes[spec.name] = table
            out = np.zeros(num, np.float64)
            out[[i for i, v in enumerate(column) if v is not None]] = coded
            points[:, j] = out
            continue
        parsed = np.zeros(num, np.float64)
        mask = np.zeros(num, bool)
        for i, v in enumerate(column):
            if v is None:
                continue
            try:
                parsed[i] = _parse_date(v) if spec.kind == "date" else float(v)
            except ValueError:
                line = kept_ids[i] + 2  # 1-based, after the header line
                raise ValueError(
                    f"{path}: line {line}: cannot parse {spec.kind} value {v!r} in column {spec.name!r}"
                ) from None
            mask[i] = True
        if mask.any():
            lo, hi = float(parsed[mask].min()), float(parsed[mask].max())
        else:
            lo = hi = 0.0
        report.numeric_bounds[spec.name] = (lo, hi)
        points[mask, j] = normalize_numeric(parsed[mask], lo, hi)

    cloud = PointCloud(points, np.asarray(kept_ids, np.int64))
    return cloud, report
