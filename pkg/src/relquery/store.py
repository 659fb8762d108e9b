"""CSV ingestion, statistical type guessing, and persistence.

Persisted ensembles are versioned JSON: partitions as assignment arrays,
concentrations, hyperparameters, seeds, and the source table fingerprint.
Sufficient statistics are derived data and are rebuilt from the table on
load, then validated.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import re
from importlib import resources
from pathlib import Path

import numpy as np

from . import components as cm
from .crosscat import CrossCatState, Ensemble
from .errors import FingerprintMismatch, FormatVersionError, IngestError, SchemaError
from .table import BINARY, CATEGORICAL, COUNT, NUMERICAL, ColumnSchema, DataTable, StatType

MISSING_TOKENS = ("", "NaN")
THOUSANDS = re.compile(r"-?\d{1,3}(,\d{3})+(\.\d+)?\Z")
ENSEMBLE_FORMAT = "relquery-ensemble"
SESSION_FORMAT = "relquery-session"
FORMAT_VERSION = 1


def dataset_path(name: str) -> Path:
    """Path of a bundled sample extract (cars_1987, college_extract, gapminder_extract)."""
    base = resources.files("relquery").joinpath("data")
    path = base.joinpath(f"{name}.csv")
    if not path.is_file():
        raise IngestError(f"no bundled dataset named {name!r}")
    return Path(str(path))


# ---------------------------------------------------------------------------
# Type guessing
# ---------------------------------------------------------------------------

def _is_number(raw: str) -> bool:
    try:
        float(raw)
        return True
    except ValueError:
        return False


def _is_plain_int(raw: str) -> bool:
    if "." in raw or "e" in raw.lower():
        return False
    try:
        int(raw)
        return True
    except ValueError:
        return False


def guess_stat_type(raw_values, categorical_cap=20, count_cap=50) -> StatType:
    """Heuristic type for one column of raw strings (missing already removed)."""
    present = [v for v in raw_values if v is not None]
    if not present:
        raise SchemaError("column has no present values; cannot guess a type")
    distinct = sorted(set(present))
    numeric = all(_is_number(v) for v in distinct)
    if set(distinct) <= {"0", "1"} or (len(distinct) == 2 and not numeric):
        return StatType(BINARY)
    if not numeric:
        return StatType(CATEGORICAL, arity=max(2, len(distinct)))
    if all(_is_plain_int(v) for v in distinct):
        ints = [int(v) for v in distinct]
        if min(ints) >= 0 and len(distinct) <= count_cap:
            return StatType(COUNT) if max(ints) > 1 else StatType(BINARY)
    return StatType(NUMERICAL)


def guess_stat_types(raw_columns, categorical_cap=20, count_cap=50):
    return [guess_stat_type(col, categorical_cap, count_cap) for col in raw_columns]


def _schema_for(name, kind: str, raw_values) -> ColumnSchema:
    present = sorted(set(v for v in raw_values if v is not None))
    if kind == BINARY:
        if len(present) > 2:
            raise SchemaError(f"column {name!r} has {len(present)} distinct values; not binary")
        if set(present) <= {"0", "1"}:
            codebook = ["0", "1"]
        else:
            codebook = list(present)
            while len(codebook) < 2:
                codebook.append(f"__unused_{len(codebook)}")
        return ColumnSchema(name, StatType(BINARY), tuple(codebook))
    if kind == CATEGORICAL:
        arity = max(2, len(present))
        codebook = list(present)
        while len(codebook) < arity:
            codebook.append(f"__unused_{len(codebook)}")
        return ColumnSchema(name, StatType(CATEGORICAL, arity=arity), tuple(codebook))
    return ColumnSchema(name, StatType(kind))


def _encode_raw(schema: ColumnSchema, raw):
    if raw is None:
        return None
    kind = schema.stat_type.kind
    if kind in (BINARY, CATEGORICAL):
        return schema.encode(raw)
    if kind == COUNT:
        try:
            value = int(raw)
        except ValueError:
            raise SchemaError(f"column {schema.name!r}: {raw!r} is not an integer") from None
        return schema.encode(value)
    try:
        return schema.encode(float(raw))
    except ValueError:
        raise SchemaError(f"column {schema.name!r}: {raw!r} is not a number") from None


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path, key=None, strip_thousands=False, overrides=None,
             categorical_cap=20, count_cap=50) -> DataTable:
    """Read an RFC-4180 CSV with a header row into a typed DataTable.

    Empty fields and the literal NaN parse as missing.  ``key`` names a
    column whose values become the row keys (must be unique).
    ``overrides`` maps column names to stat type kinds and wins over the
    guessing heuristic.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        grid = list(reader)
    if len(set(header)) != len(header):
        raise IngestError(f"{path}: duplicate header names")
    for i, row in enumerate(grid):
        if len(row) != len(header):
            raise IngestError(f"{path}: row {i + 1} has {len(row)} fields, expected {len(header)}")
    columns = []
    for c in range(len(header)):
        col = []
        for row in grid:
            raw = row[c].strip()
            if raw in MISSING_TOKENS:
                col.append(None)
                continue
            if strip_thousands and THOUSANDS.match(raw):
                raw = raw.replace(",", "")
            col.append(raw)
        columns.append(col)
    overrides = overrides or {}
    schemas = []
    for name, col in zip(header, columns):
        if name in overrides:
            kind = overrides[name]
        else:
            kind = guess_stat_type(col, categorical_cap, count_cap).kind
        schemas.append(_schema_for(name, kind, col))
    cells = []
    for r in range(len(grid)):
        cells.append([_encode_raw(schemas[c], columns[c][r]) for c in range(len(header))])
    key_column = None
    if key is not None:
        if key not in header:
            raise IngestError(f"key column {key!r} not in header")
        key_column = header.index(key)
    try:
        return DataTable(schemas, cells, key_column=key_column)
    except SchemaError as e:
        raise IngestError(str(e)) from None


def save_csv(table: DataTable, path):
    """Serialize a table back to CSV; inverse of load_csv for values,
    missingness, schema shape, and row order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.column_names)
        for r in range(table.n_rows):
            row = []
            for c in range(table.p):
                value = table.columns[c].decode(table.get_cell(r, c))
                if value is None:
                    row.append("")
                elif isinstance(value, float):
                    row.append(repr(value))
                else:
                    row.append(str(value))
            writer.writerow(row)


def retype_column(table: DataTable, name: str, kind: str) -> DataTable:
    """Rebuild the table with one column forced to a different stat type."""
    c = table.column_index(name)
    raw = []
    for r in range(table.n_rows):
        value = table.columns[c].decode(table.get_cell(r, c))
        if value is None:
            raw.append(None)
        elif isinstance(value, float):
            raw.append(repr(value))
        else:
            raw.append(str(value))
    new_schema = _schema_for(name, kind, raw)
    schemas = list(table.columns)
    schemas[c] = new_schema
    cells = []
    for r in range(table.n_rows):
        row = []
        for cc in range(table.p):
            if cc == c:
                row.append(_encode_raw(new_schema, raw[r]))
            else:
                row.append(table.get_cell(r, cc))
        cells.append(row)
    return DataTable(schemas, cells, row_keys=table.row_keys, key_column=table.key_column)


# ---------------------------------------------------------------------------
# Ensemble persistence
# ---------------------------------------------------------------------------

_HYPER_TYPES = {
    "bernoulli": cm.BetaBernoulli,
    "multinomial": cm.DirichletMultinomial,
    "normal": cm.NormalInverseGamma,
    "poisson": cm.GammaPoisson,
}


def _hyper_to_dict(hyper):
    out = dataclasses.asdict(hyper)
    out["family"] = hyper.family
    return out


def _hyper_from_dict(d):
    d = dict(d)
    family = d.pop("family")
    return _HYPER_TYPES[family](**d)


def save_ensemble(ensemble: Ensemble, path):
    states = []
    for st in ensemble.states:
        if st.pending:
            raise ValueError("cannot persist a state with pending hypothetical rows")
        states.append({
            "alpha0": st.alpha0,
            "sweeps_done": st.sweeps_done,
            "v": [int(b) for b in st.v],
            "blocks": [
                {"alpha": b.alpha, "z": [int(y) for y in b.z]}
                for b in st.blocks
            ],
            "hypers": [_hyper_to_dict(st.hypers[c]) for c in range(st.n_cols)],
        })
    payload = {
        "format": ENSEMBLE_FORMAT,
        "version": FORMAT_VERSION,
        "table_fingerprint": ensemble.table_fingerprint,
        "seed": ensemble.seed,
        "seeds": list(ensemble.seeds),
        "analyze_iterations": ensemble.analyze_iterations,
        "states": states,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_ensemble(path, table: DataTable) -> Ensemble:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != ENSEMBLE_FORMAT:
        raise FormatVersionError(f"{path}: not an ensemble file")
    if payload.get("version") != FORMAT_VERSION:
        raise FormatVersionError(f"{path}: unsupported version {payload.get('version')!r}")
    if payload["table_fingerprint"] != table.fingerprint():
        raise FingerprintMismatch(f"{path}: ensemble was built against a different table")
    states = []
    for spec in payload["states"]:
        hypers = {c: _hyper_from_dict(d) for c, d in enumerate(spec["hypers"])}
        v = spec["v"]
        z_by_block = {k: np.asarray(blk["z"], dtype=np.int64)
                      for k, blk in enumerate(spec["blocks"])}
        alphas = {k: blk["alpha"] for k, blk in enumerate(spec["blocks"])}
        st = CrossCatState.from_assignments(
            table, v, z_by_block, alpha0=spec["alpha0"], alpha1=alphas, hypers=hypers)
        st.sweeps_done = spec["sweeps_done"]
        st.validate()
        states.append(st)
    return Ensemble(
        states=states,
        seed=payload["seed"],
        seeds=list(payload["seeds"]),
        table_fingerprint=payload["table_fingerprint"],
        analyze_iterations=payload["analyze_iterations"],
    )


# ---------------------------------------------------------------------------
# Session manifests
# ---------------------------------------------------------------------------

def save_manifest(path, *, table_path, table_fingerprint, key=None, stattypes=None,
                  ensemble_path=None, seed=0, analyze_history=()):
    payload = {
        "format": SESSION_FORMAT,
        "version": FORMAT_VERSION,
        "table_path": str(table_path),
        "table_fingerprint": table_fingerprint,
        "key": key,
        "stattypes": dict(stattypes or {}),
        "ensemble_path": str(ensemble_path) if ensemble_path else None,
        "seed": seed,
        "analyze_history": list(analyze_history),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_manifest(path):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != SESSION_FORMAT:
        raise FormatVersionError(f"{path}: not a session manifest")
    if payload.get("version") != FORMAT_VERSION:
        raise FormatVersionError(f"{path}: unsupported version {payload.get('version')!r}")
    return payload
