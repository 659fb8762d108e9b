"""Tabular data model: schema, statistical types, cells with explicit missingness.

A table is immutable after construction and safe to share across threads.
Cells are stored per column as a float64 value array plus a boolean
presence mask; categorical and binary cells hold integer codes mapped
through the column codebook, counts hold non-negative integers, and
numerical cells hold finite reals.  A missing cell is represented only by
``mask == False``, never by a sentinel value.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import SchemaError

BINARY = "binary"
CATEGORICAL = "categorical"
NUMERICAL = "numerical"
COUNT = "count"

_KINDS = (BINARY, CATEGORICAL, NUMERICAL, COUNT)


@dataclass(frozen=True)
class StatType:
    """Statistical type of a column; selects the conjugate component family."""

    kind: str
    arity: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SchemaError(f"unknown stat type kind: {self.kind!r}")
        if self.kind == CATEGORICAL and self.arity < 2:
            raise SchemaError("categorical arity must be >= 2")
        if self.kind == BINARY and self.arity not in (0, 2):
            raise SchemaError("binary columns have implicit arity 2")

    @property
    def is_coded(self) -> bool:
        return self.kind in (BINARY, CATEGORICAL)

    @property
    def codes(self) -> int:
        return 2 if self.kind == BINARY else self.arity


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    stat_type: StatType
    codebook: Optional[tuple] = None  # code -> string, index position is the code

    def __post_init__(self):
        if self.stat_type.is_coded:
            if self.codebook is None:
                raise SchemaError(f"column {self.name!r} needs a codebook")
            if len(self.codebook) != self.stat_type.codes:
                raise SchemaError(
                    f"column {self.name!r}: codebook has {len(self.codebook)} "
                    f"entries, expected {self.stat_type.codes}"
                )
        elif self.codebook is not None:
            raise SchemaError(f"column {self.name!r} must not carry a codebook")

    def decode(self, value):
        """Map a stored cell value back to its user-facing form."""
        if value is None:
            return None
        if self.stat_type.is_coded:
            return self.codebook[int(value)]
        if self.stat_type.kind == COUNT:
            return int(value)
        return float(value)

    def encode(self, raw):
        """Map a user-supplied value to its stored form; raises SchemaError."""
        if raw is None:
            return None
        if self.stat_type.is_coded:
            if isinstance(raw, str):
                try:
                    return self.codebook.index(raw)
                except ValueError:
                    raise SchemaError(
                        f"value {raw!r} not in codebook of {self.name!r}"
                    ) from None
            code = int(raw)
            if not (0 <= code < self.stat_type.codes) or code != raw:
                raise SchemaError(f"code {raw!r} out of range for {self.name!r}")
            return code
        if self.stat_type.kind == COUNT:
            value = int(raw)
            if value != raw or value < 0:
                raise SchemaError(f"count cell must be a non-negative integer: {raw!r}")
            return value
        value = float(raw)
        if not math.isfinite(value):
            raise SchemaError(f"numerical cell must be finite: {raw!r}")
        return value


class DataTable:
    """N x p grid of optional typed values with stable row identifiers."""

    def __init__(
        self,
        columns: Sequence[ColumnSchema],
        cells: Sequence[Sequence],
        row_keys: Optional[Sequence[str]] = None,
        key_column: Optional[int] = None,
    ):
        self.columns = list(columns)
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        self.p = len(self.columns)
        self.n_rows = len(cells)
        self._values = np.zeros((self.p, self.n_rows), dtype=np.float64)
        self._mask = np.zeros((self.p, self.n_rows), dtype=bool)
        for r, row in enumerate(cells):
            if len(row) != self.p:
                raise SchemaError(f"row {r} has {len(row)} cells, expected {self.p}")
            for c, raw in enumerate(row):
                value = self.columns[c].encode(raw)
                if value is not None:
                    self._values[c, r] = float(value)
                    self._mask[c, r] = True
        self._values.setflags(write=False)
        self._mask.setflags(write=False)
        self.key_column = key_column
        if row_keys is not None:
            keys = [str(k) for k in row_keys]
        elif key_column is not None:
            keys = []
            for r in range(self.n_rows):
                v = self.get_cell(r, key_column)
                if v is None:
                    raise SchemaError(f"key column has a missing value at row {r}")
                keys.append(str(self.columns[key_column].decode(v)))
        else:
            keys = [str(r) for r in range(self.n_rows)]
        if len(keys) != self.n_rows:
            raise SchemaError("row_keys length does not match row count")
        if len(set(keys)) != len(keys):
            raise SchemaError("duplicate row keys")
        self.row_keys = keys
        self._key_index = {k: r for r, k in enumerate(keys)}
        self._fingerprint = None

    # -- access ----------------------------------------------------------

    @property
    def column_names(self):
        return [c.name for c in self.columns]

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise SchemaError(f"unknown column: {name!r}")

    def get_cell(self, row: int, col: int):
        """Stored value at (row, col) or None when the cell is missing."""
        if not (0 <= row < self.n_rows):
            raise IndexError(f"row {row} out of range [0, {self.n_rows})")
        if not (0 <= col < self.p):
            raise IndexError(f"col {col} out of range [0, {self.p})")
        if not self._mask[col, row]:
            return None
        value = self._values[col, row]
        if self.columns[col].stat_type.kind == NUMERICAL:
            return float(value)
        return int(value)

    def column_observed_rows(self, col: int):
        """Rowids with a present cell in col, ascending."""
        if not (0 <= col < self.p):
            raise IndexError(f"col {col} out of range [0, {self.p})")
        return [int(r) for r in np.nonzero(self._mask[col])[0]]

    def column_arrays(self, col: int):
        """(values, mask) views for vectorized consumers; read-only."""
        return self._values[col], self._mask[col]

    def present_count(self) -> int:
        return int(self._mask.sum())

    def resolve_key(self, key) -> int:
        """Map a row key literal (or integer rowid) to a rowid."""
        if isinstance(key, (int, np.integer)) and not isinstance(key, bool):
            rowid = int(key)
            if not (0 <= rowid < self.n_rows):
                raise SchemaError(f"rowid {rowid} out of range")
            return rowid
        k = str(key)
        if k in self._key_index:
            return self._key_index[k]
        raise SchemaError(f"unknown row key: {key!r}")

    # -- identity --------------------------------------------------------

    def fingerprint(self) -> str:
        """Content hash over schema, values, missingness, and row order."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for c in self.columns:
                h.update(repr((c.name, c.stat_type.kind, c.stat_type.arity, c.codebook)).encode())
            h.update(repr(self.row_keys).encode())
            for c in range(self.p):
                for r in range(self.n_rows):
                    if self._mask[c, r]:
                        h.update(repr(self._values[c, r]).encode())
                    else:
                        h.update(b"_")
                    h.update(b";")
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    def __repr__(self):
        return f"DataTable({self.n_rows} rows x {self.p} cols)"
