"""Comparison rankers: vector-space measures over median-imputed views,
the Bayes Sets marginal-likelihood ratio, and pairwise heatmap emission."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import leaves_list, linkage
from scipy.spatial.distance import squareform

from . import components as cm
from .errors import SchemaError
from .relevance import CoOccurrenceCache, dependence_probability, relevance_pairwise
from .table import BINARY, CATEGORICAL, COUNT, NUMERICAL, DataTable

MEASURES = ("relevance", "cosine", "euclidean", "braycurtis")


# ---------------------------------------------------------------------------
# Vector views
# ---------------------------------------------------------------------------

@dataclass
class VectorView:
    """Dense per-row vectors over a column subset after imputation."""

    vectors: np.ndarray          # (N, d)
    feature_names: list
    selected_columns: list
    context: object = None
    imputation: str = "median"


def select_context_columns(ensemble, table: DataTable, context: str, k: int):
    """The k columns most dependent with the context column; ties keep
    table column order."""
    ci = table.column_index(context)
    scored = []
    for c in range(table.p):
        scored.append((-dependence_probability(ensemble, ci, c), c))
    scored.sort()
    return [table.column_names[c] for _, c in scored[:k]]


def impute_median(table: DataTable, columns, standardize=False) -> VectorView:
    """Fill missing cells (median for numeric, modal code for coded columns),
    one-hot expand categoricals, optionally z-score numeric features."""
    vectors = []
    names = []
    for name in columns:
        c = table.column_index(name)
        values, mask = table.column_arrays(c)
        if not mask.any():
            raise SchemaError(f"column {name!r} is fully missing; cannot impute")
        present = values[mask]
        kind = table.columns[c].stat_type.kind
        if kind in (NUMERICAL, COUNT):
            fill = float(np.median(present))
            col = np.where(mask, values, fill).astype(float)
            if standardize:
                sd = col.std()
                col = (col - col.mean()) / sd if sd > 0 else col - col.mean()
            vectors.append(col)
            names.append(name)
        elif kind == BINARY:
            codes, counts = np.unique(present.astype(int), return_counts=True)
            mode = int(codes[np.argmax(counts)])
            col = np.where(mask, values, mode).astype(float)
            vectors.append(col)
            names.append(name)
        elif kind == CATEGORICAL:
            codes, counts = np.unique(present.astype(int), return_counts=True)
            mode = int(codes[np.argmax(counts)])
            filled = np.where(mask, values, mode).astype(int)
            arity = table.columns[c].stat_type.arity
            for j in range(arity):
                vectors.append((filled == j).astype(float))
                names.append(f"{name}={table.columns[c].codebook[j]}")
        else:
            raise SchemaError(f"cannot vectorize column {name!r} of kind {kind}")
    return VectorView(np.column_stack(vectors), names, list(columns))


# ---------------------------------------------------------------------------
# Vector measures
# ---------------------------------------------------------------------------

def cosine_similarity(u, v):
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("vector lengths differ")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def euclidean_distance(u, v):
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("vector lengths differ")
    return float(np.linalg.norm(u - v))


def bray_curtis(u, v):
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("vector lengths differ")
    low = min(u.min(), v.min(), 0.0)
    if low < 0:  # min-shift to the non-negative domain
        u, v = u - low, v - low
    denom = np.sum(u + v)
    if denom == 0:
        return 0.0
    return float(np.sum(np.abs(u - v)) / denom)


# ---------------------------------------------------------------------------
# Bayes Sets
# ---------------------------------------------------------------------------

def bayes_sets_score(table: DataTable, query_rows, candidate: int, hypers=None) -> float:
    """p(x_r | x_Q) / p(x_r) under the per-column conjugate families,
    product across all columns; computed in the log domain."""
    if hypers is None:
        from .crosscat import default_hypers

        hypers = default_hypers(table)
    total = 0.0
    for c in range(table.p):
        x = table.get_cell(candidate, c)
        if x is None:
            continue
        hyper = hypers[c]
        stats = cm.empty_stats(hyper)
        for q in query_rows:
            xq = table.get_cell(q, c)
            if xq is not None:
                stats = cm.incorporate_value(stats, xq)
        total += cm.log_predictive(x, stats, hyper)
        total -= cm.log_predictive(x, cm.empty_stats(hyper), hyper)
    return math.exp(total)


# ---------------------------------------------------------------------------
# Pairwise heatmaps
# ---------------------------------------------------------------------------

def pairwise_matrix(measure: str, table: DataTable, context: str, *,
                    ensemble=None, cache=None, k=10) -> np.ndarray:
    """Symmetric N x N similarity matrix in [0, 1] with unit diagonal."""
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    n = table.n_rows
    if measure == "relevance":
        if ensemble is None:
            raise ValueError("relevance heatmaps need an analyzed ensemble")
        if cache is None:
            cache = CoOccurrenceCache(ensemble)
        return relevance_pairwise(ensemble, cache, table.column_index(context))
    if ensemble is not None:
        columns = select_context_columns(ensemble, table, context, k)
    else:
        columns = list(table.column_names)
    view = impute_median(table, columns, standardize=True)
    x = view.vectors
    out = np.zeros((n, n))
    if measure == "cosine":
        norms = np.linalg.norm(x, axis=1)
        safe = np.where(norms == 0, 1.0, norms)
        sims = (x @ x.T) / np.outer(safe, safe)
        sims[norms == 0, :] = 0.0
        sims[:, norms == 0] = 0.0
        if sims.min() < 0:
            sims = (1.0 + sims) / 2.0
        out = sims
    elif measure == "euclidean":
        d2 = np.maximum(
            np.sum(x * x, axis=1)[:, None] + np.sum(x * x, axis=1)[None, :] - 2 * (x @ x.T),
            0.0,
        )
        out = 1.0 / (1.0 + np.sqrt(d2))
    else:  # braycurtis
        shifted = x - min(x.min(), 0.0)
        for i in range(n):
            for j in range(i, n):
                denom = np.sum(shifted[i] + shifted[j])
                d = np.sum(np.abs(shifted[i] - shifted[j])) / denom if denom > 0 else 0.0
                out[i, j] = out[j, i] = 1.0 / (1.0 + d)
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return out


def heatmap_ordering(matrix: np.ndarray):
    """Leaf order from single-linkage clustering of 1 - similarity."""
    n = matrix.shape[0]
    if n < 3:
        return list(range(n))
    dist = 1.0 - matrix
    np.fill_diagonal(dist, 0.0)
    dist = np.maximum(dist, 0.0)
    condensed = squareform((dist + dist.T) / 2.0, checks=False)
    return [int(i) for i in leaves_list(linkage(condensed, method="single"))]


def _color_ramp(value: float):
    """Fixed dark-blue -> teal -> yellow ramp over [0, 1]."""
    anchors = [
        (0.0, (13, 8, 135)),
        (0.5, (38, 130, 142)),
        (1.0, (253, 231, 37)),
    ]
    value = min(max(float(value), 0.0), 1.0)
    for (t0, c0), (t1, c1) in zip(anchors, anchors[1:]):
        if value <= t1:
            f = (value - t0) / (t1 - t0)
            return tuple(int(round(a + f * (b - a))) for a, b in zip(c0, c1))
    return anchors[-1][1]


def write_heatmap(matrix: np.ndarray, labels, csv_path=None, png_path=None,
                  order=None, cell_pixels=6):
    """Emit the matrix as CSV and/or a PNG image (rows reordered for display)."""
    if order is None:
        order = heatmap_ordering(matrix)
    ordered = matrix[np.ix_(order, order)]
    names = [labels[i] for i in order]
    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([""] + names)
            for name, row in zip(names, ordered):
                writer.writerow([name] + [f"{v:.6f}" for v in row])
    if png_path:
        from PIL import Image

        n = ordered.shape[0]
        img = Image.new("RGB", (n, n))
        img.putdata([_color_ramp(v) for v in ordered.ravel()])
        if cell_pixels > 1:
            img = img.resize((n * cell_pixels, n * cell_pixels), Image.NEAREST)
        img.save(png_path)
    return order
