"""CrossCat latent state, prior sampling, collapsed Gibbs kernels, ensembles.

A state factorizes the table twice: a Chinese restaurant process partitions
columns into blocks, and within each block a second CRP partitions the rows
into clusters.  Component parameters are integrated out, so the state
carries only partitions, concentrations, per-column hyperparameters, and
per-(block, cluster, column) sufficient statistics.

Randomness is explicit everywhere.  Ensemble sweeps derive one stream per
(state, iteration) from the ensemble seed, which makes `analyze(a)` followed
by `analyze(b)` bit-identical to `analyze(a + b)` and lets states run on
parallel workers without changing results.
"""

from __future__ import annotations

import bisect
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln

from . import components as cm
from .clusterstats import batched_predictive, cluster_stats_for
from .errors import FingerprintMismatch, SchemaError
from .rng import choose_log, stream
from .table import DataTable

DEFAULT_COLUMN_ALPHA = 1.0
DEFAULT_ROW_ALPHA = 1.0
GRID_SIZE = 30
ALPHA_GRID = np.logspace(-1, 2, GRID_SIZE)  # concentration grid, both CRPs
ALL_KERNELS = ("rows", "columns", "hypers")


# ---------------------------------------------------------------------------
# Chinese restaurant process
# ---------------------------------------------------------------------------

def crp_weights(cluster_sizes, alpha):
    """Seating probabilities for the next customer: one entry per existing
    cluster plus a final entry for a fresh cluster."""
    if alpha <= 0:
        raise ValueError("alpha must be strictly positive")
    sizes = [float(s) for s in cluster_sizes]
    if any(s <= 0 for s in sizes):
        raise ValueError("cluster sizes must be strictly positive")
    w = np.array(sizes + [float(alpha)])
    return w / w.sum()


def crp_log_pdf(cluster_sizes, alpha):
    """log probability of a partition with the given group sizes under CRP(alpha)."""
    sizes = np.asarray(list(cluster_sizes), dtype=float)
    n = sizes.sum()
    if n == 0:
        return 0.0
    return float(
        len(sizes) * math.log(alpha)
        + gammaln(sizes).sum()
        + math.lgamma(alpha)
        - math.lgamma(alpha + n)
    )


def crp_sample(n, alpha, rng):
    """Sequential CRP draw; returns dense labels in order of first appearance."""
    z = np.zeros(n, dtype=np.int64)
    us = rng.random(n)
    sizes = []
    alpha = float(alpha)
    for i in range(n):
        u = us[i] * (i + alpha)
        k = 0
        acc = 0.0
        for s in sizes:
            acc += s
            if u < acc:
                break
            k += 1
        if k == len(sizes):
            sizes.append(1)
        else:
            sizes[k] += 1
        z[i] = k
    return z


def _groups_from_z(z):
    groups = [[] for _ in range(int(z.max()) + 1 if len(z) else 0)]
    for r, y in enumerate(z):
        groups[int(y)].append(r)
    return groups


def _dense_relabel(z):
    """Relabel arbitrary labels to 0..K-1 by first occurrence."""
    out = np.empty(len(z), dtype=np.int64)
    seen = {}
    for i, label in enumerate(z):
        key = label if not isinstance(label, np.generic) else label.item()
        if key not in seen:
            seen[key] = len(seen)
        out[i] = seen[key]
    return out


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------

class Block:
    """One column block: member columns, a row partition, per-column stats."""

    __slots__ = ("cols", "alpha", "z", "groups", "stats")

    def __init__(self, cols, alpha, z, groups, stats):
        self.cols = cols        # sorted column ids
        self.alpha = alpha      # row CRP concentration for this block
        self.z = z              # np.int64, dense cluster labels per row
        self.groups = groups    # list of rowid lists, one per cluster
        self.stats = stats      # col id -> ColumnClusterStats

    @property
    def n_clusters(self):
        return len(self.groups)

    def sizes(self):
        return np.fromiter((len(g) for g in self.groups), dtype=float, count=len(self.groups))


class CrossCatState:
    """One posterior sample: column partition, row partitions, hyperparameters."""

    def __init__(self, table: DataTable, alpha0, hypers, blocks, v):
        self.table = table
        self.alpha0 = float(alpha0)
        self.hypers = dict(hypers)          # col -> components hyper dataclass
        self.blocks = blocks                # list[Block]
        self.v = np.asarray(v, dtype=np.int64)
        self.version = 0                    # bumped by sweeps (cache invalidation)
        self.sweeps_done = 0
        self.pending = []                   # LIFO undo tokens for hypothetical rows
        self._grids = {}

    # -- basics ----------------------------------------------------------

    @property
    def n_rows(self):
        return self.table.n_rows

    @property
    def n_cols(self):
        return self.table.p

    def data(self, c):
        return self.table.column_arrays(c)

    def block_of(self, c) -> Block:
        return self.blocks[int(self.v[c])]

    def _reindex(self):
        for i, b in enumerate(self.blocks):
            for c in b.cols:
                self.v[c] = i

    def copy(self) -> "CrossCatState":
        blocks = [
            Block(
                list(b.cols), b.alpha, np.array(b.z),
                [list(g) for g in b.groups],
                {c: st.copy() for c, st in b.stats.items()},
            )
            for b in self.blocks
        ]
        out = CrossCatState(self.table, self.alpha0, dict(self.hypers), blocks, np.array(self.v))
        out.sweeps_done = self.sweeps_done
        out.version = self.version
        return out

    # -- construction ----------------------------------------------------

    @classmethod
    def from_assignments(cls, table, v, z_by_block, alpha0=DEFAULT_COLUMN_ALPHA,
                         alpha1=DEFAULT_ROW_ALPHA, hypers=None):
        """Build a state from explicit partitions.

        v: per-column block labels (any hashables); z_by_block maps each
        label to a length-N row assignment.  alpha1 may be a scalar or a
        map from block label to scalar.
        """
        if hypers is None:
            hypers = default_hypers(table)
        if len(v) != table.p:
            raise SchemaError("column assignment length does not match table")
        labels = []
        for label in v:
            if label not in labels:
                labels.append(label)
        blocks = []
        dense_v = np.zeros(table.p, dtype=np.int64)
        for i, label in enumerate(labels):
            cols = sorted(c for c in range(table.p) if v[c] == label)
            for c in cols:
                dense_v[c] = i
            z = _dense_relabel(np.asarray(z_by_block[label]))
            if len(z) != table.n_rows:
                raise SchemaError("row assignment length does not match table")
            groups = _groups_from_z(z)
            alpha = alpha1[label] if isinstance(alpha1, dict) else alpha1
            stats = {}
            for c in cols:
                vals, mask = table.column_arrays(c)
                stats[c] = cluster_stats_for(hypers[c], vals, mask, z, len(groups))
            blocks.append(Block(cols, float(alpha), z, groups, stats))
        return cls(table, alpha0, hypers, blocks, dense_v)

    # -- scoring ---------------------------------------------------------

    def log_joint_score(self) -> float:
        """Unnormalized posterior log density of this state.

        Recomputed from a canonical rebuild (fsum over terms), so the score
        is exactly invariant to block/cluster relabeling and to the
        incremental-update history.
        """
        if self.pending:
            raise ValueError("cannot score a state with pending hypothetical rows")
        terms = [crp_log_pdf([len(b.cols) for b in self.blocks], self.alpha0)]
        for b in self.blocks:
            terms.append(crp_log_pdf([len(g) for g in b.groups], b.alpha))
            for c in b.cols:
                vals, mask = self.data(c)
                st = cluster_stats_for(self.hypers[c], vals, mask, b.z, b.n_clusters)
                terms.extend(float(t) for t in st.marginal_vec())
        return math.fsum(terms)

    def validate(self):
        """Check partition validity and suffstat consistency by full rebuild."""
        seen_cols = []
        for i, b in enumerate(self.blocks):
            if not b.cols:
                raise AssertionError(f"block {i} is empty")
            if b.cols != sorted(b.cols):
                raise AssertionError(f"block {i} columns not sorted")
            seen_cols.extend(b.cols)
            for c in b.cols:
                if int(self.v[c]) != i:
                    raise AssertionError(f"v[{c}] does not point at its block")
            n = self.n_rows + sum(1 for t in self.pending if t.block_index == i)
            if len(b.z) != n:
                raise AssertionError(f"block {i}: z has wrong length")
            if any(len(g) == 0 for g in b.groups):
                raise AssertionError(f"block {i}: empty cluster")
            member = np.full(n, -1, dtype=np.int64)
            for y, g in enumerate(b.groups):
                for r in g:
                    if member[r] != -1:
                        raise AssertionError(f"row {r} in two clusters")
                    member[r] = y
            if not np.array_equal(member, b.z):
                raise AssertionError(f"block {i}: groups disagree with z")
            for c in b.cols:
                vals, mask = self.data(c)
                if len(b.z) > self.n_rows:
                    continue  # pending temps: rebuild check applies at rest only
                rebuilt = cluster_stats_for(self.hypers[c], vals, mask, b.z, b.n_clusters)
                st = b.stats[c]
                for f in st.fields:
                    got, want = getattr(st, f), getattr(rebuilt, f)
                    if not np.allclose(got, want, rtol=1e-6, atol=1e-9):
                        raise AssertionError(f"block {i} col {c}: stats drifted on {f}")
        if sorted(seen_cols) != list(range(self.n_cols)):
            raise AssertionError("columns are not partitioned")
        return True

    def fingerprint(self):
        """Canonical content tuple: equal iff states have identical content."""
        order = sorted(range(len(self.blocks)), key=lambda i: min(self.blocks[i].cols))
        parts = [self.alpha0]
        for i in order:
            b = self.blocks[i]
            z = _dense_relabel(b.z)
            parts.append((
                tuple(b.cols), b.alpha, tuple(int(t) for t in z),
                tuple(_stats_tuple(b.stats[c], b.z, z) for c in b.cols),
                tuple(repr(self.hypers[c]) for c in b.cols),
            ))
        return tuple(parts)

    # -- hyper grids -----------------------------------------------------

    def hyper_grids(self, c):
        if c not in self._grids:
            self._grids[c] = _build_grids(self.table, c, self.hypers[c])
        return self._grids[c]


def _stats_tuple(st, live_z, canon_z):
    """Stats rows reordered to canonical cluster labels."""
    # map canonical label -> live label via first occurrence
    mapping = {}
    for live, canon in zip(live_z, canon_z):
        mapping.setdefault(int(canon), int(live))
    rows = []
    for canon in range(len(mapping)):
        y = mapping[canon]
        rows.append(tuple(tuple(np.asarray(getattr(st, f)[y]).ravel().tolist()) for f in st.fields))
    return tuple(rows)


def default_hypers(table: DataTable):
    hypers = {}
    for c in range(table.p):
        vals, mask = table.column_arrays(c)
        hypers[c] = cm.default_hyper(table.columns[c].stat_type, vals[mask].tolist())
    return hypers


def prior_sample(table: DataTable, rng, alpha0=DEFAULT_COLUMN_ALPHA,
                 alpha1=DEFAULT_ROW_ALPHA, hypers=None) -> CrossCatState:
    """Draw column and row partitions from their CRPs; condition stats on the table."""
    if table.n_rows < 1 or table.p < 1:
        raise SchemaError("prior_sample needs at least one row and one column")
    v = crp_sample(table.p, alpha0, rng)
    z_by_block = {}
    for k in range(int(v.max()) + 1):
        z_by_block[k] = crp_sample(table.n_rows, alpha1, rng)
    return CrossCatState.from_assignments(table, v, z_by_block, alpha0, alpha1, hypers)


# ---------------------------------------------------------------------------
# Gibbs kernels
# ---------------------------------------------------------------------------

def _delete_cluster(block: Block, y: int):
    block.groups.pop(y)
    block.z[block.z > y] -= 1
    for st in block.stats.values():
        st.remove_cluster(y)


def _move_row(state: CrossCatState, block: Block, r: int, rng, cols_data=None):
    if cols_data is None:
        cols_data = [(block.stats[c], *state.data(c)) for c in block.cols]
    y = int(block.z[r])
    present = [(st, float(vals[r])) for st, vals, mask in cols_data if mask[r]]
    block.groups[y].remove(r)
    for st, x in present:
        st.unincorporate(y, x)
    if not block.groups[y]:
        _delete_cluster(block, y)
    k = len(block.groups)
    logw = np.log(block.sizes())
    w_new = math.log(block.alpha)
    if present:
        logw = logw + batched_predictive(present)
        for st, x in present:
            w_new += st.prior_predictive(x)
    y_new = choose_log(rng, np.append(logw, w_new))
    if y_new == k:
        block.groups.append([])
        for st in block.stats.values():
            st.add_cluster()
    block.groups[y_new].append(r)
    block.z[r] = y_new
    for st, x in present:
        st.incorporate(y_new, x)


def gibbs_row_sweep(state: CrossCatState, rng) -> CrossCatState:
    """Reassign every row in every block by collapsed Gibbs."""
    if state.pending:
        raise ValueError("cannot sweep a state with pending hypothetical rows")
    for block in state.blocks:
        cols_data = [(block.stats[c], *state.data(c)) for c in block.cols]
        for r in range(state.n_rows):
            _move_row(state, block, r, rng, cols_data)
    state.version += 1
    return state


def gibbs_column_sweep(state: CrossCatState, rng, grid_alpha=False,
                       split_merge=True) -> CrossCatState:
    """Reassign every column among existing blocks plus one auxiliary block,
    then (by default) attempt one block split/merge proposal.

    The auxiliary block carries a fresh CRP row partition, except when the
    column currently sits alone in its block, in which case that block (and
    its row partition) serves as the auxiliary.  ``grid_alpha`` controls the
    concentration of blocks created by split/merge: fixed at the default
    when concentrations are not being resampled, drawn uniformly from the
    resampling grid when they are.
    """
    if state.pending:
        raise ValueError("cannot sweep a state with pending hypothetical rows")
    for c in range(state.n_cols):
        home = state.block_of(c)
        singleton = len(home.cols) == 1
        vals, mask = state.data(c)
        hyper = state.hypers[c]
        home.cols.remove(c)
        del home.stats[c]
        if singleton:
            aux = home
            candidates = [b for b in state.blocks if b is not home]
        else:
            z_aux = crp_sample(state.n_rows, DEFAULT_ROW_ALPHA, rng)
            aux = Block([], DEFAULT_ROW_ALPHA, z_aux, _groups_from_z(z_aux), {})
            candidates = list(state.blocks)
        scored = []
        logw = []
        for b in candidates:
            st = cluster_stats_for(hyper, vals, mask, b.z, b.n_clusters)
            scored.append(st)
            logw.append(math.log(len(b.cols)) + st.marginal_sum())
        st_aux = cluster_stats_for(hyper, vals, mask, aux.z, aux.n_clusters)
        logw.append(math.log(state.alpha0) + st_aux.marginal_sum())
        pick = choose_log(rng, np.array(logw))
        if pick == len(candidates):
            target, target_stats = aux, st_aux
            if not singleton:
                state.blocks.append(aux)
        else:
            target, target_stats = candidates[pick], scored[pick]
            if singleton:
                state.blocks.remove(home)
        bisect.insort(target.cols, c)
        target.stats[c] = target_stats
        state._reindex()
    if split_merge:
        _split_merge_move(state, rng, grid_alpha)
    state.version += 1
    return state


# ---------------------------------------------------------------------------
# Block split/merge (Jain-Neal style, sequential allocation proposals)
#
# The per-column scan above cannot cross the barrier between "all columns in
# one block over the intersection row partition" and the factorized truth:
# moving a single column out forces it to pay a full row-CRP on its own.
# This Metropolis-Hastings pair proposes splitting one block into two (or
# merging two blocks), with row partitions built by sequential allocation
# from the columns' own predictive distributions, so proposal densities are
# tractable and the move targets the exact posterior.
# ---------------------------------------------------------------------------

def _alloc_row_partition(state, cols, alpha, rng=None, target=None):
    """Sequentially seat rows using the columns' posterior predictives.

    Returns (z, log q).  With ``target`` given, nothing is sampled: the
    log-probability that the allocation would produce exactly that
    partition (labels canonicalized by first occurrence) is accumulated.
    """
    n = state.n_rows
    stats = []
    for c in cols:
        vals, mask = state.data(c)
        st = _BY_FAMILY_EMPTY(state.hypers[c])
        stats.append((st, vals, mask))
    if target is not None:
        target = _dense_relabel(np.asarray(target))
    z = np.zeros(n, dtype=np.int64)
    sizes = []
    logq = 0.0
    log_alpha = math.log(alpha)
    for r in range(n):
        k = len(sizes)
        logw = np.log(np.asarray(sizes, dtype=float)) if k else np.zeros(0)
        w_new = log_alpha
        present = [(st, float(vals[r])) for st, vals, mask in stats if mask[r]]
        if present:
            logw = logw + batched_predictive(present)
            for st, x in present:
                w_new += st.prior_predictive(x)
        all_w = np.append(logw, w_new)
        m = all_w.max()
        norm = m + math.log(np.exp(all_w - m).sum())
        if target is None:
            pick = choose_log(rng, all_w)
        else:
            pick = int(target[r])
        logq += float(all_w[pick]) - norm
        if pick == k:
            sizes.append(0)
            for st, _, _ in stats:
                st.add_cluster()
        sizes[pick] += 1
        z[r] = pick
        for st, x in present:
            st.incorporate(pick, x)
    return z, logq


def _BY_FAMILY_EMPTY(hyper):
    from .clusterstats import empty_cluster_stats

    return empty_cluster_stats(hyper, 0)


def _marginal_under(state, c, z, n_clusters):
    vals, mask = state.data(c)
    return cluster_stats_for(state.hypers[c], vals, mask, z, n_clusters).marginal_sum()


def _column_side_allocation(state, others, z_i, k_i, z_j, k_j, rng=None, target=None):
    """Assign each remaining column to side i or j with probability
    proportional to (side column count) x exp(column marginal under the
    side's row partition).  Returns (side map, log q)."""
    counts = [1.0, 1.0]
    side = {}
    logq = 0.0
    for c in sorted(others):
        li = math.log(counts[0]) + _marginal_under(state, c, z_i, k_i)
        lj = math.log(counts[1]) + _marginal_under(state, c, z_j, k_j)
        norm = np.logaddexp(li, lj)
        if target is None:
            pick = 0 if math.log(rng.random()) < li - norm else 1
        else:
            pick = target[c]
        side[c] = pick
        logq += (li if pick == 0 else lj) - norm
        counts[pick] += 1
    return side, logq


def _draw_block_alpha(rng, grid_alpha):
    if grid_alpha:
        return float(ALPHA_GRID[int(rng.integers(len(ALPHA_GRID)))])
    return DEFAULT_ROW_ALPHA


def _col_partition_logp(state, sizes):
    return crp_log_pdf(sizes, state.alpha0)


def _replace_blocks(state, remove, add):
    for b in remove:
        state.blocks.remove(b)
    state.blocks.extend(add)
    state._reindex()


def _build_block(state, cols, alpha, z):
    groups = _groups_from_z(z)
    stats = {}
    for c in cols:
        vals, mask = state.data(c)
        stats[c] = cluster_stats_for(state.hypers[c], vals, mask, z, len(groups))
    return Block(sorted(cols), alpha, np.array(z), groups, stats)


def _split_merge_move(state: CrossCatState, rng, grid_alpha=False):
    p = state.n_cols
    if p < 2:
        return
    j = int(rng.integers(p))
    i = int(rng.integers(p - 1))
    if i >= j:
        i += 1
    if state.v[i] == state.v[j]:
        _propose_split(state, i, j, rng, grid_alpha)
    else:
        _propose_merge(state, i, j, rng, grid_alpha)


def _propose_split(state, i, j, rng, grid_alpha):
    b = state.block_of(i)
    if not grid_alpha and b.alpha != DEFAULT_ROW_ALPHA:
        return
    others = [c for c in b.cols if c not in (i, j)]
    a_i = _draw_block_alpha(rng, grid_alpha)
    a_j = _draw_block_alpha(rng, grid_alpha)
    z_i, q_zi = _alloc_row_partition(state, [i], a_i, rng=rng)
    z_j, q_zj = _alloc_row_partition(state, [j], a_j, rng=rng)
    k_i = int(z_i.max()) + 1
    k_j = int(z_j.max()) + 1
    side, q_cols = _column_side_allocation(state, others, z_i, k_i, z_j, k_j, rng=rng)
    cols_i = [i] + [c for c in others if side[c] == 0]
    cols_j = [j] + [c for c in others if side[c] == 1]
    # reverse direction: a merge of the two new blocks regenerating b.z
    q_rev = _alloc_row_partition(state, b.cols, b.alpha, target=b.z)[1]
    old_sizes = [len(x.cols) for x in state.blocks]
    new_sizes = [len(x.cols) for x in state.blocks if x is not b] \
        + [len(cols_i), len(cols_j)]
    delta = _col_partition_logp(state, new_sizes) - _col_partition_logp(state, old_sizes)
    delta += crp_log_pdf(np.bincount(z_i), a_i) + crp_log_pdf(np.bincount(z_j), a_j) \
        - crp_log_pdf([len(g) for g in b.groups], b.alpha)
    for c in cols_i:
        delta += _marginal_under(state, c, z_i, k_i) - b.stats[c].marginal_sum()
    for c in cols_j:
        delta += _marginal_under(state, c, z_j, k_j) - b.stats[c].marginal_sum()
    delta += q_rev - (q_zi + q_zj + q_cols)
    if math.log(rng.random()) < delta:
        _replace_blocks(state, [b], [
            _build_block(state, cols_i, a_i, z_i),
            _build_block(state, cols_j, a_j, z_j),
        ])


def _propose_merge(state, i, j, rng, grid_alpha):
    b_i = state.block_of(i)
    b_j = state.block_of(j)
    if not grid_alpha and (b_i.alpha != DEFAULT_ROW_ALPHA or b_j.alpha != DEFAULT_ROW_ALPHA):
        return
    cols = sorted(b_i.cols + b_j.cols)
    a_m = _draw_block_alpha(rng, grid_alpha)
    z_m, q_zm = _alloc_row_partition(state, cols, a_m, rng=rng)
    k_m = int(z_m.max()) + 1
    # reverse direction: the split that regenerates the current two blocks
    q_zi = _alloc_row_partition(state, [i], b_i.alpha, target=b_i.z)[1]
    q_zj = _alloc_row_partition(state, [j], b_j.alpha, target=b_j.z)[1]
    others = [c for c in cols if c not in (i, j)]
    target_side = {c: (0 if c in b_i.cols else 1) for c in others}
    _, q_cols = _column_side_allocation(
        state, others, b_i.z, b_i.n_clusters, b_j.z, b_j.n_clusters, target=target_side)
    old_sizes = [len(x.cols) for x in state.blocks]
    new_sizes = [len(x.cols) for x in state.blocks if x not in (b_i, b_j)] + [len(cols)]
    delta = _col_partition_logp(state, new_sizes) - _col_partition_logp(state, old_sizes)
    delta += crp_log_pdf(np.bincount(z_m), a_m) \
        - crp_log_pdf([len(g) for g in b_i.groups], b_i.alpha) \
        - crp_log_pdf([len(g) for g in b_j.groups], b_j.alpha)
    for c in cols:
        live = b_i if c in b_i.cols else b_j
        delta += _marginal_under(state, c, z_m, k_m) - live.stats[c].marginal_sum()
    delta += (q_zi + q_zj + q_cols) - q_zm
    if math.log(rng.random()) < delta:
        _replace_blocks(state, [b_i, b_j], [_build_block(state, cols, a_m, z_m)])


def _resample_on_grid(rng, grid, log_post):
    return float(grid[choose_log(rng, np.asarray(log_post))])


def crp_log_pdf_grid(cluster_sizes, grid):
    """crp_log_pdf evaluated for every concentration in the grid at once."""
    sizes = np.asarray(list(cluster_sizes), dtype=float)
    n = sizes.sum()
    if n == 0:
        return np.zeros(len(grid))
    const = gammaln(sizes).sum()
    return len(sizes) * np.log(grid) + const + gammaln(grid) - gammaln(grid + n)


def hyper_grid_gibbs(state: CrossCatState, rng) -> CrossCatState:
    """Resample alpha0, each block's alpha1, and each column's hyperparameters
    by Gibbs over fixed 30-point grids."""
    if state.pending:
        raise ValueError("cannot sweep a state with pending hypothetical rows")
    logp = crp_log_pdf_grid([len(b.cols) for b in state.blocks], ALPHA_GRID)
    state.alpha0 = _resample_on_grid(rng, ALPHA_GRID, logp)
    for b in state.blocks:
        logp = crp_log_pdf_grid([len(g) for g in b.groups], ALPHA_GRID)
        b.alpha = _resample_on_grid(rng, ALPHA_GRID, logp)
    for c in range(state.n_cols):
        b = state.block_of(c)
        st = b.stats[c]
        hyper = state.hypers[c]
        for dim, grid in state.hyper_grids(c).items():
            st.hyper = hyper
            logp = st.grid_logp(dim, grid)
            hyper = replace(hyper, **{dim: _resample_on_grid(rng, grid, logp)})
        state.hypers[c] = hyper
        st.hyper = hyper
    state.version += 1
    return state


def _loggrid(lo, hi, n=GRID_SIZE):
    lo = max(float(lo), 1e-8)
    hi = max(float(hi), lo * 10.0)
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))


def _build_grids(table, c, hyper):
    vals, mask = table.column_arrays(c)
    xs = vals[mask]
    n = max(len(xs), 2)
    if hyper.family == "bernoulli":
        return {"a": _loggrid(1.0 / n, n), "b": _loggrid(1.0 / n, n)}
    if hyper.family == "multinomial":
        return {"alpha": _loggrid(1.0 / (n * hyper.arity), n)}
    if hyper.family == "normal":
        if len(xs):
            lo, hi = float(xs.min()), float(xs.max())
            var = float(xs.var())
        else:
            lo, hi, var = -1.0, 1.0, 1.0
        if lo == hi:
            lo, hi = lo - 1.0, hi + 1.0
        var = var if var > 0 else 1.0
        return {
            "m": np.linspace(lo, hi, GRID_SIZE),
            "r": _loggrid(1.0 / n, n),
            "s": _loggrid(var / n, var * n),
            "nu": _loggrid(0.5, 2 * n),
        }
    if hyper.family == "poisson":
        mean = float(xs.mean()) if len(xs) else 1.0
        mean = mean if mean > 0 else 0.1
        return {
            "shape": _loggrid(0.5, 2 * n),
            "rate": _loggrid(0.5 / mean, 2 * n / mean),
        }
    raise TypeError(f"unknown family {hyper.family!r}")


# ---------------------------------------------------------------------------
# Ensemble
# ---------------------------------------------------------------------------

@dataclass
class Ensemble:
    states: list
    seed: int
    seeds: list
    table_fingerprint: str
    analyze_iterations: int = 0

    @property
    def n_states(self):
        return len(self.states)

    @property
    def table(self):
        return self.states[0].table


def initialize_ensemble(table: DataTable, n_states: int, seed: int,
                        alpha0=DEFAULT_COLUMN_ALPHA, alpha1=DEFAULT_ROW_ALPHA) -> Ensemble:
    """H independent prior draws conditioned on the table."""
    if n_states < 1:
        raise ValueError("need at least one state")
    states = []
    for s in range(n_states):
        states.append(prior_sample(table, stream(seed, s, 0), alpha0, alpha1))
    return Ensemble(states, seed, list(range(n_states)), table.fingerprint())


def _sweep_once(state, seed, index, iteration, kernels):
    rng = stream(seed, index, iteration)
    if "rows" in kernels:
        gibbs_row_sweep(state, rng)
    if "columns" in kernels:
        gibbs_column_sweep(state, rng, grid_alpha="hypers" in kernels)
    if "hypers" in kernels:
        hyper_grid_gibbs(state, rng)
    state.sweeps_done = iteration
    return state


def _run_state(args):
    state, seed, index, first, count, kernels = args
    for i in range(count):
        _sweep_once(state, seed, index, first + i, kernels)
    return state


def analyze(ensemble: Ensemble, table: DataTable, iterations=None, seconds=None,
            kernels=ALL_KERNELS, workers=1) -> Ensemble:
    """Apply full sweeps to every state independently.

    Exactly one of iterations/seconds must be given.  A time budget runs
    whole rounds (one sweep per state) until it is exhausted, always
    completing the in-flight sweep.
    """
    if ensemble.table_fingerprint != table.fingerprint():
        raise FingerprintMismatch("ensemble was built for a different table")
    if (iterations is None) == (seconds is None):
        raise ValueError("give exactly one of iterations or seconds")
    if iterations is not None:
        if iterations < 0:
            raise ValueError("iterations must be >= 0")
        first = ensemble.analyze_iterations + 1
        if iterations == 0:
            return ensemble
        if workers > 1:
            jobs = [
                (st, ensemble.seed, s, first, iterations, kernels)
                for s, st in enumerate(ensemble.states)
            ]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                ensemble.states = list(pool.map(_run_state, jobs))
        else:
            for s, st in enumerate(ensemble.states):
                _run_state((st, ensemble.seed, s, first, iterations, kernels))
        ensemble.analyze_iterations += iterations
        return ensemble
    deadline = time.monotonic() + float(seconds)
    done = 0
    while True:
        it = ensemble.analyze_iterations + done + 1
        for s, st in enumerate(ensemble.states):
            _sweep_once(st, ensemble.seed, s, it, kernels)
        done += 1
        if time.monotonic() >= deadline:
            break
    ensemble.analyze_iterations += done
    return ensemble
