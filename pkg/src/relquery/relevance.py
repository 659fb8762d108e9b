"""Predictive relevance estimation over a CrossCat ensemble.

The estimand for a query set Q, candidate row r, and context column c is
the fraction of posterior samples in which r shares a row cluster with
every member of Q inside the block containing c.  Two routes compute it:

* a naive triple loop over (row, state, query member), kept as the oracle;
* a sparse co-occurrence route that counts, per cluster, how many query
  members it holds and compares the count to |Q| in integer arithmetic,
  so the two routes agree exactly.

Hypothetical records are handled by temporarily Gibbs-incorporating them
into each sample's context block, computing relevance on the updated
samples, and unincorporating in LIFO order, which restores every state
bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .clusterstats import batched_predictive
from .crosscat import CrossCatState, Ensemble
from .errors import SchemaError
from .rng import choose_log, text_stream
from .table import DataTable

import math


# ---------------------------------------------------------------------------
# Queries and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelevanceQuery:
    """Query rows (existing rowids and/or partial hypothetical records) plus
    the context column index."""

    context: int
    existing: tuple = ()
    hypothetical: tuple = ()  # tuple of dicts: column index -> stored value

    def __post_init__(self):
        if not self.existing and not self.hypothetical:
            raise SchemaError("relevance query needs at least one query record")

    def canonical(self):
        hyp = tuple(tuple(sorted(h.items())) for h in self.hypothetical)
        return (self.context, tuple(self.existing), hyp)


@dataclass
class RelevanceResult:
    """Per-row hit counts out of h_used states; probabilities are counts/h_used."""

    counts: np.ndarray
    h_used: int
    ignored_columns: dict = field(default_factory=dict)

    @property
    def probabilities(self):
        return self.counts / float(self.h_used)


# ---------------------------------------------------------------------------
# Co-occurrence matrices
# ---------------------------------------------------------------------------

@dataclass
class CoOccurrenceMatrix:
    """List-of-lists form of the binary row-equivalence matrix of one block."""

    block: int
    groups: list
    row_to_group: np.ndarray

    def implied_dense(self):
        n = len(self.row_to_group)
        s = np.zeros((n, n), dtype=np.int8)
        for g in self.groups:
            idx = np.asarray(g)
            s[np.ix_(idx, idx)] = 1
        return s


def build_cooccurrence(state: CrossCatState, block: int) -> CoOccurrenceMatrix:
    """One pass over the block's cluster membership lists; cost O(N)."""
    if not (0 <= block < len(state.blocks)):
        raise SchemaError(f"unknown block: {block}")
    b = state.blocks[block]
    return CoOccurrenceMatrix(
        block=block,
        groups=[list(g) for g in b.groups],
        row_to_group=np.array(b.z),
    )


class CoOccurrenceCache:
    """Lazily built co-occurrence matrices keyed by (state, block, version).

    Matrices survive across queries against an unchanged ensemble; analyze
    sweeps bump each state's version, which invalidates transparently.
    Temporary rows appended by hypothetical-record queries patch the cached
    matrices in place and unpatch on unincorporation, keeping the amortized
    reuse without a rebuild.
    """

    def __init__(self, ensemble: Ensemble):
        self.ensemble = ensemble
        self._cache = {}

    def matrix(self, state_index: int, block: int) -> CoOccurrenceMatrix:
        state = self.ensemble.states[state_index]
        key = (state_index, block)
        hit = self._cache.get(key)
        if hit is not None and hit[0] == state.version:
            return hit[1]
        m = build_cooccurrence(state, block)
        self._cache[key] = (state.version, m)
        return m

    def _patch_append(self, state_index, block, rowid, cluster, was_new):
        key = (state_index, block)
        hit = self._cache.get(key)
        if hit is None or hit[0] != self.ensemble.states[state_index].version:
            return
        m = hit[1]
        if was_new:
            m.groups.append([rowid])
        else:
            m.groups[cluster].append(rowid)
        m.row_to_group = np.append(m.row_to_group, cluster)

    def _patch_pop(self, state_index, block, rowid, cluster, was_new):
        key = (state_index, block)
        hit = self._cache.get(key)
        if hit is None or hit[0] != self.ensemble.states[state_index].version:
            return
        m = hit[1]
        assert m.groups[cluster] and m.groups[cluster][-1] == rowid
        m.groups[cluster].pop()
        if was_new:
            m.groups.pop(cluster)
        m.row_to_group = m.row_to_group[:-1]


# ---------------------------------------------------------------------------
# Relevance of existing rows
# ---------------------------------------------------------------------------

def relevance_naive(ensemble: Ensemble, query: RelevanceQuery) -> RelevanceResult:
    """Direct per-(row, sample, query-member) indicator scan; the oracle path."""
    if query.hypothetical:
        raise SchemaError("the naive path handles existing rows only")
    n = ensemble.table.n_rows
    _check_query_rows(query.existing, n)
    counts = np.zeros(n, dtype=np.int64)
    for state in ensemble.states:
        z = state.block_of(query.context).z
        for r in range(n):
            hit = 1
            for q in query.existing:
                if z[q] != z[r]:
                    hit = 0
                    break
            counts[r] += hit
    return RelevanceResult(counts, ensemble.n_states)


def relevance_fast(ensemble: Ensemble, cache: CoOccurrenceCache,
                   query: RelevanceQuery) -> RelevanceResult:
    """Sparse route: per cluster, count query members and compare to |Q|."""
    if query.hypothetical:
        raise SchemaError("use relevance_query for hypothetical records")
    n = ensemble.table.n_rows
    _check_query_rows(query.existing, n)
    counts = np.zeros(n, dtype=np.int64)
    n_query = len(query.existing)
    for h, state in enumerate(ensemble.states):
        block = int(state.v[query.context])
        counts += _state_indicator(cache.matrix(h, block), query.existing, n_query, n)
    return RelevanceResult(counts, ensemble.n_states)


def _state_indicator(matrix: CoOccurrenceMatrix, rowids, n_query, n_out):
    per_group = np.zeros(len(matrix.groups), dtype=np.int64)
    for q in rowids:
        per_group[matrix.row_to_group[q]] += 1
    hits = per_group == n_query
    return hits[matrix.row_to_group[:n_out]].astype(np.int64)


def _check_query_rows(rowids, n):
    if len(set(rowids)) != len(rowids):
        raise SchemaError("duplicate rowid in query set")
    for q in rowids:
        if not (0 <= q < n):
            raise SchemaError(f"query rowid {q} out of range")


# ---------------------------------------------------------------------------
# Hypothetical records (incorporate / unincorporate)
# ---------------------------------------------------------------------------

@dataclass
class UndoToken:
    """Reverses one record incorporation; tokens unwind in LIFO order."""

    block_index: int
    rowid: int
    cluster: int
    was_new: bool
    saved: dict
    used_columns: tuple
    ignored_columns: tuple


def incorporate_record(state: CrossCatState, context: int, record: dict, rng):
    """Gibbs-incorporate one partial record into the context block.

    Values for columns outside the context block are ignored.  A record
    with no usable values still incorporates: the weights reduce to the
    block's CRP seating probabilities.  Returns an undo token whose
    ``rowid`` indexes the appended row inside the block's partition.
    """
    if not (0 <= context < state.n_cols):
        raise SchemaError(f"unknown context column: {context}")
    block_index = int(state.v[context])
    b = state.blocks[block_index]
    present = {}
    ignored = []
    for c, value in record.items():
        if value is None:
            continue
        if c in b.cols:
            present[c] = state.table.columns[c].encode(value)
        else:
            ignored.append(c)
    k = b.n_clusters
    logw = np.log(b.sizes())
    w_new = math.log(b.alpha)
    if present:
        pairs = [(b.stats[c], x) for c, x in present.items()]
        logw = logw + batched_predictive(pairs)
        for st, x in pairs:
            w_new += st.prior_predictive(x)
    y = choose_log(rng, np.append(logw, w_new))
    was_new = y == k
    saved = {}
    if was_new:
        b.groups.append([])
        for st in b.stats.values():
            st.add_cluster()
    else:
        saved = {c: b.stats[c].snapshot(y) for c in present}
    rowid = len(b.z)
    b.z = np.append(b.z, y)
    b.groups[y].append(rowid)
    for c, x in present.items():
        b.stats[c].incorporate(y, x)
    token = UndoToken(block_index, rowid, y, was_new, saved,
                      tuple(present), tuple(ignored))
    state.pending.append(token)
    return token


def unincorporate_record(state: CrossCatState, token: UndoToken):
    """Reverse the matching incorporate; restores stats exactly."""
    if not state.pending or state.pending[-1] is not token:
        raise ValueError("tokens must unwind in LIFO order on their own state")
    state.pending.pop()
    b = state.blocks[token.block_index]
    y = token.cluster
    assert b.groups[y] and b.groups[y][-1] == token.rowid
    b.groups[y].pop()
    b.z = b.z[: len(b.z) - 1]
    if token.was_new:
        assert not b.groups[y]
        b.groups.pop(y)
        for st in b.stats.values():
            st.remove_cluster(y)
    else:
        for c, snap in token.saved.items():
            b.stats[c].restore(y, snap)
    return state


# ---------------------------------------------------------------------------
# Full query procedure
# ---------------------------------------------------------------------------

def relevance_query(ensemble: Ensemble, query: RelevanceQuery,
                    cache: Optional[CoOccurrenceCache] = None,
                    seed: int = 0) -> RelevanceResult:
    """Relevance of every original row to a mixed existing/hypothetical query.

    Hypothetical records are incorporated per sample, scored, and removed;
    the ensemble is content-identical on return.  The derived randomness
    depends only on (seed, query content, sample index), so repeated
    identical queries return identical results.
    """
    n = ensemble.table.n_rows
    _check_query_rows(query.existing, n)
    if cache is None:
        cache = CoOccurrenceCache(ensemble)
    counts = np.zeros(n, dtype=np.int64)
    ignored = {}
    canon = query.canonical()
    for h, state in enumerate(ensemble.states):
        block = int(state.v[query.context])
        rng = text_stream(seed, "relevance", canon, h)
        tokens = []
        for record in query.hypothetical:
            token = incorporate_record(state, query.context, record, rng)
            cache._patch_append(h, block, token.rowid, token.cluster, token.was_new)
            tokens.append(token)
            for c in token.ignored_columns:
                ignored[c] = ignored.get(c, 0) + 1
        rowids = list(query.existing) + [t.rowid for t in tokens]
        counts += _state_indicator(cache.matrix(h, block), rowids, len(rowids), n)
        for token in reversed(tokens):
            cache._patch_pop(h, block, token.rowid, token.cluster, token.was_new)
            unincorporate_record(state, token)
    return RelevanceResult(counts, ensemble.n_states, ignored)


def relevance_pairwise(ensemble: Ensemble, cache: CoOccurrenceCache,
                       context: int) -> np.ndarray:
    """N x N matrix with entry (i, j) = relevance of j to the singleton {i}."""
    n = ensemble.table.n_rows
    acc = np.zeros((n, n))
    for h, state in enumerate(ensemble.states):
        m = cache.matrix(h, int(state.v[context]))
        for g in m.groups:
            idx = np.asarray([r for r in g if r < n])
            if len(idx):
                acc[np.ix_(idx, idx)] += 1.0
    return acc / ensemble.n_states


def dependence_probability(ensemble: Ensemble, c1: int, c2: int) -> float:
    """Fraction of samples in which the two columns share a block."""
    p = ensemble.table.p
    if not (0 <= c1 < p) or not (0 <= c2 < p):
        raise SchemaError("unknown column in dependence query")
    hits = sum(1 for st in ensemble.states if st.v[c1] == st.v[c2])
    return hits / ensemble.n_states
