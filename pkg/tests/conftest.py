import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relquery.table import ColumnSchema, DataTable, StatType


def binary_table(rows, name="x"):
    """One binary column from a list of 0/1/None."""
    schema = [ColumnSchema(name, StatType("binary"), ("0", "1"))]
    return DataTable(schema, [[v] for v in rows])


def binary_table2(col_a, col_b):
    schema = [
        ColumnSchema("a", StatType("binary"), ("0", "1")),
        ColumnSchema("b", StatType("binary"), ("0", "1")),
    ]
    return DataTable(schema, [list(pair) for pair in zip(col_a, col_b)])


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


def planted_table(seed=11, n=120, clusters_a=(0, 1, 2), clusters_b=(0, 1, 2)):
    """Two independent column blocks (4 columns each), 3 planted row clusters
    per block; mixed statistical types with well-separated parameters.

    Returns (table, z_a, z_b): the planted cluster labels per block.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    z_a = np.array([i % len(clusters_a) for i in range(n)])
    z_b = rng.permutation(np.array([i % len(clusters_b) for i in range(n)]))

    def numeric(z, means, sd=1.0):
        return [float(rng.normal(means[k], sd)) for k in z]

    def counts(z, lams):
        return [int(rng.poisson(lams[k])) for k in z]

    def cat(z, probs_by_cluster):
        return [int(rng.choice(len(probs_by_cluster[k]), p=probs_by_cluster[k])) for k in z]

    def binary(z, ps):
        return [int(rng.random() < ps[k]) for k in z]

    cat_probs = [
        [0.9, 0.05, 0.05],
        [0.05, 0.9, 0.05],
        [0.05, 0.05, 0.9],
    ]
    cols = {
        "a_num1": numeric(z_a, [0.0, 8.0, 16.0]),
        "a_num2": numeric(z_a, [5.0, -5.0, 15.0]),
        "a_cat": cat(z_a, cat_probs),
        "a_count": counts(z_a, [2.0, 15.0, 40.0]),
        "b_num1": numeric(z_b, [0.0, 8.0, 16.0]),
        "b_num2": numeric(z_b, [-10.0, 0.0, 10.0]),
        "b_cat": cat(z_b, cat_probs),
        "b_bin": binary(z_b, [0.05, 0.5, 0.95]),
    }
    schemas = []
    for name in cols:
        if name.endswith(("num1", "num2")):
            schemas.append(ColumnSchema(name, StatType("numerical")))
        elif name.endswith("cat"):
            schemas.append(ColumnSchema(name, StatType("categorical", arity=3), ("c0", "c1", "c2")))
        elif name.endswith("count"):
            schemas.append(ColumnSchema(name, StatType("count")))
        else:
            schemas.append(ColumnSchema(name, StatType("binary"), ("0", "1")))
    names = list(cols)
    cells = [[cols[name][r] for name in names] for r in range(n)]
    return DataTable(schemas, cells), z_a, z_b
