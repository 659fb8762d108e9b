"""Type guessing and persistence."""

import json
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relquery import store
from relquery.crosscat import analyze, initialize_ensemble
from relquery.errors import FingerprintMismatch, FormatVersionError, SchemaError
from relquery.relevance import CoOccurrenceCache, RelevanceQuery, relevance_fast
from relquery.table import BINARY, CATEGORICAL, COUNT, NUMERICAL

from conftest import planted_table


# ---------------------------------------------------------------------------
# guess_stat_types
# ---------------------------------------------------------------------------

def test_guess_examples():
    assert store.guess_stat_type(["rear", "front", "4wd"]).kind == CATEGORICAL
    assert store.guess_stat_type(["rear", "front", "4wd"]).arity == 3
    assert store.guess_stat_type(["0", "1", "1", "0"]).kind == BINARY
    assert store.guess_stat_type(["3.14", "2.71", None]).kind == NUMERICAL


def test_guess_two_value_set_is_binary():
    assert store.guess_stat_type(["four", "two"]).kind == BINARY


def test_guess_counts_and_numericals():
    assert store.guess_stat_type([str(v) for v in (3, 9, 4, 9, 12)]).kind == COUNT
    # >50 distinct integers fall through to numerical
    assert store.guess_stat_type([str(v) for v in range(120)]).kind == NUMERICAL
    # negative integers are not counts
    assert store.guess_stat_type(["-3", "4", "9"]).kind == NUMERICAL
    # integers in {0, 1} only
    assert store.guess_stat_type(["0", "1"]).kind == BINARY


def test_guess_untypable_column():
    with pytest.raises(SchemaError):
        store.guess_stat_type([None, None])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "1", "2.5", "x"]), min_size=1, max_size=30),
       st.randoms())
def test_guess_is_row_order_insensitive(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert store.guess_stat_type(values) == store.guess_stat_type(shuffled)


def test_thousands_separators(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text('price\n"35,550"\n"1,200"\n900\n')
    default = store.load_csv(path)
    assert default.columns[0].stat_type.kind == CATEGORICAL  # not parsed as numbers
    stripped = store.load_csv(path, strip_thousands=True)
    assert stripped.columns[0].stat_type.kind == COUNT
    assert stripped.get_cell(0, 0) == 35550


def test_cars_extract_schema():
    table = store.load_csv(store.dataset_path("cars_1987"))
    kinds = {c.name: c.stat_type.kind for c in table.columns}
    assert kinds["make"] == CATEGORICAL
    assert kinds["doors"] == BINARY
    assert kinds["body"] == CATEGORICAL
    assert table.n_rows == 10 and table.p == 7


# ---------------------------------------------------------------------------
# Ensemble persistence
# ---------------------------------------------------------------------------

def _small_ensemble():
    table, _, _ = planted_table(n=24)
    ensemble = initialize_ensemble(table, 4, seed=9)
    analyze(ensemble, table, iterations=3)
    return table, ensemble


def test_ensemble_round_trip_scores(tmp_path):
    table, ensemble = _small_ensemble()
    path = tmp_path / "ens.json"
    store.save_ensemble(ensemble, path)
    loaded = store.load_ensemble(path, table)
    assert loaded.analyze_iterations == ensemble.analyze_iterations
    assert loaded.seed == ensemble.seed
    for a, b in zip(ensemble.states, loaded.states):
        assert a.log_joint_score() == b.log_joint_score()
        assert a.fingerprint() == b.fingerprint()


def test_ensemble_round_trip_preserves_relevance(tmp_path):
    table, ensemble = _small_ensemble()
    query = RelevanceQuery(context=0, existing=(0, 5))
    before = relevance_fast(ensemble, CoOccurrenceCache(ensemble), query)
    path = tmp_path / "ens.json"
    store.save_ensemble(ensemble, path)
    loaded = store.load_ensemble(path, table)
    after = relevance_fast(loaded, CoOccurrenceCache(loaded), query)
    assert np.array_equal(before.counts, after.counts)


def test_ensemble_fingerprint_mismatch(tmp_path):
    table, ensemble = _small_ensemble()
    path = tmp_path / "ens.json"
    store.save_ensemble(ensemble, path)
    other, _, _ = planted_table(seed=99, n=24)
    with pytest.raises(FingerprintMismatch):
        store.load_ensemble(path, other)


def test_ensemble_version_check(tmp_path):
    table, ensemble = _small_ensemble()
    path = tmp_path / "ens.json"
    store.save_ensemble(ensemble, path)
    payload = json.loads(path.read_text())
    payload["version"] = 999
    path.write_text(json.dumps(payload))
    with pytest.raises(FormatVersionError):
        store.load_ensemble(path, table)


def test_corrupted_structure_rejected(tmp_path):
    table, ensemble = _small_ensemble()
    path = tmp_path / "ens.json"
    store.save_ensemble(ensemble, path)
    payload = json.loads(path.read_text())
    payload["states"][0]["blocks"][0]["z"] = payload["states"][0]["blocks"][0]["z"][:-1]
    path.write_text(json.dumps(payload))
    with pytest.raises(Exception):
        store.load_ensemble(path, table)


def test_cars_scale_persistence_under_one_second(tmp_path):
    rng = np.random.Generator(np.random.Philox(3))
    header = ",".join(f"c{i}" for i in range(26))
    lines = [header]
    for r in range(200):
        lines.append(",".join(f"{rng.normal():.4f}" for _ in range(26)))
    path = tmp_path / "big.csv"
    path.write_text("\n".join(lines) + "\n")
    table = store.load_csv(path)
    ensemble = initialize_ensemble(table, 64, seed=1)
    out = tmp_path / "big.json"
    start = time.perf_counter()
    store.save_ensemble(ensemble, out)
    loaded = store.load_ensemble(out, table)
    elapsed = time.perf_counter() - start
    assert loaded.n_states == 64
    assert elapsed < 1.0


def test_manifest_round_trip(tmp_path):
    path = tmp_path / "session.json"
    store.save_manifest(
        path, table_path="x.csv", table_fingerprint="abc", key="name",
        stattypes={"a": "numerical"}, ensemble_path="e.json", seed=7,
        analyze_history=[{"iterations": 10}])
    loaded = store.load_manifest(path)
    assert loaded["table_fingerprint"] == "abc"
    assert loaded["stattypes"] == {"a": "numerical"}
    assert loaded["seed"] == 7


def test_retype_column():
    table = store.load_csv(store.dataset_path("cars_1987"))
    retyped = store.retype_column(table, "price", NUMERICAL)
    c = retyped.column_index("price")
    assert retyped.columns[c].stat_type.kind == NUMERICAL
    assert retyped.get_cell(0, c) == 35550.0
    with pytest.raises(SchemaError):
        store.retype_column(table, "make", NUMERICAL)
