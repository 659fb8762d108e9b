"""Planner/evaluator: turns parsed statements into result tables.

Evaluation order for SELECT/ESTIMATE follows the engine contract:
resolve EXISTING row keys, evaluate every relevance/dependence expression
once (vectorized over all rows), apply WHERE, apply ORDER BY with a stable
sort (missing values last, DESC ties keep rowid order), apply LIMIT, then
project.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass

import numpy as np

from ..errors import BqlExecutionError
from ..relevance import RelevanceQuery, dependence_probability, relevance_query
from ..table import CATEGORICAL, BINARY, COUNT, NUMERICAL
from . import nodes as N
from .printer import expr_to_bql


@dataclass
class ResultTable:
    columns: list
    rows: list
    kinds: list  # per column: 'prob' | 'num' | 'str' | 'auto'

    def single_column(self):
        if len(self.columns) != 1:
            raise BqlExecutionError("subquery must return exactly one column")
        return [row[0] for row in self.rows]


def status(message) -> ResultTable:
    return ResultTable(["status"], [[message]], ["str"])


def execute(stmt, session) -> ResultTable:
    if isinstance(stmt, N.CreateTable):
        table = session.create_table(stmt.name, stmt.path, stmt.key)
        return status(f"created table {stmt.name} ({table.n_rows} rows, {table.p} columns)")
    if isinstance(stmt, N.CreatePopulation):
        session.create_population(stmt.name, stmt.table, stmt.directives, stmt.baseline)
        return status(f"created population {stmt.name} for {stmt.table}")
    if isinstance(stmt, N.InitializeModels):
        pop = session.population_for(stmt.population)
        session.initialize_models(pop, stmt.n_models, stmt.baseline)
        return status(f"initialized {stmt.n_models} models for {pop.name}")
    if isinstance(stmt, N.AnalyzeStmt):
        pop = session.population_for(stmt.population)
        applied = session.analyze_population(pop, stmt.amount, stmt.unit)
        return status(f"analyzed {pop.name}: {applied} total sweeps")
    if isinstance(stmt, N.PairwiseDependence):
        return _exec_pairwise(stmt, session)
    if isinstance(stmt, N.Select):
        return _exec_select(stmt, session)
    raise BqlExecutionError(f"cannot execute {type(stmt).__name__}")


def _exec_pairwise(stmt, session) -> ResultTable:
    pop = session.population_for(stmt.population)
    ensemble = session.require_models(pop)
    names = pop.table.column_names
    rows = []
    for a in names:
        for b in names:
            d = dependence_probability(ensemble, pop.table.column_index(a), pop.table.column_index(b))
            rows.append([a, b, d])
    return ResultTable(["name0", "name1", "dependence_probability"], rows, ["str", "str", "prob"])


# ---------------------------------------------------------------------------
# SELECT / ESTIMATE
# ---------------------------------------------------------------------------

def _walk(node):
    yield node
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        for f in dataclasses.fields(node):
            value = getattr(node, f.name)
            yield from _walk_value(value)


def _walk_value(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        yield from _walk(value)
    elif isinstance(value, tuple):
        for item in value:
            yield from _walk_value(item)


def _statement_exprs(stmt: N.Select):
    if stmt.items:
        for p in stmt.items:
            yield p.expr
    if stmt.where is not None:
        yield stmt.where
    if stmt.order_by is not None:
        yield stmt.order_by[0]


class _Env:
    def __init__(self, table, model_values, subqueries):
        self.table = table
        self.model_values = model_values
        self.subqueries = subqueries
        self.col_index = {c.name: i for i, c in enumerate(table.columns)}

    def cell(self, name, r):
        if name in self.col_index:
            c = self.col_index[name]
            return self.table.columns[c].decode(self.table.get_cell(r, c))
        if name == "rowid":
            return r
        raise BqlExecutionError(f"unknown column: {name!r}")


def _exec_select(stmt: N.Select, session) -> ResultTable:
    pop = session.find_population(stmt.source)
    table = pop.table if pop is not None else session.table_for(stmt.source)
    n = table.n_rows

    items = stmt.items
    if items is None:
        items = tuple(N.Projection(N.ColumnRef(c.name), None) for c in table.columns)
    order_by = stmt.order_by
    if order_by is not None:
        order_by = (_resolve_alias(order_by[0], items), order_by[1])

    model_values = {}
    subqueries = {}
    exprs = list(_statement_exprs(stmt))
    if order_by is not None:
        exprs.append(order_by[0])
    for expr in exprs:
        for node in _walk_value(expr):
            if isinstance(node, N.RelevanceProbability) and node not in model_values:
                model_values[node] = _eval_relevance(node, session, pop, table)
            elif isinstance(node, N.DependenceProbability) and node not in model_values:
                ensemble = session.require_models(pop)
                model_values[node] = dependence_probability(
                    ensemble, table.column_index(node.col1), table.column_index(node.col2))
            elif isinstance(node, N.InOp) and isinstance(node.items, N.Select):
                subqueries[node.items] = set(_exec_select(node.items, session).single_column())

    env = _Env(table, model_values, subqueries)
    rows = list(range(n))
    if stmt.where is not None:
        rows = [r for r in rows if _truthy(_eval(stmt.where, env, r))]

    aggregate = any(_contains_aggregate(p.expr) for p in items)
    if aggregate:
        out_row = []
        columns, kinds = [], []
        for p in items:
            if not isinstance(p.expr, N.Aggregate):
                raise BqlExecutionError("aggregate queries may only project aggregates")
            out_row.append(_eval_aggregate(p.expr, env, rows))
            columns.append(p.alias or expr_to_bql(p.expr))
            kinds.append("prob" if _is_prob(p.expr.inner) else "num")
        return ResultTable(columns, [out_row], kinds)

    if order_by is not None:
        expr, desc = order_by
        keyed = [(r, _eval(expr, env, r)) for r in rows]
        present = [rv for rv in keyed if rv[1] is not None]
        absent = [rv for rv in keyed if rv[1] is None]
        present.sort(key=lambda rv: _sort_key(rv[1]), reverse=desc)
        rows = [r for r, _ in present] + [r for r, _ in absent]
    if stmt.limit is not None:
        rows = rows[: stmt.limit]

    columns, kinds = [], []
    for p in items:
        columns.append(p.alias or _header(p.expr))
        kinds.append(_kind_of(p.expr, table))
    out = [[_eval(p.expr, env, r) for p in items] for r in rows]
    return ResultTable(columns, out, kinds)


def _resolve_alias(expr, items):
    if isinstance(expr, N.ColumnRef):
        for p in items:
            if p.alias == expr.name:
                return p.expr
    return expr


def _header(expr):
    if isinstance(expr, N.ColumnRef):
        return expr.name
    return expr_to_bql(expr)


def _kind_of(expr, table):
    if _is_prob(expr):
        return "prob"
    if isinstance(expr, N.ColumnRef):
        try:
            kind = table.columns[table.column_index(expr.name)].stat_type.kind
        except Exception:
            return "num" if expr.name == "rowid" else "auto"
        return "str" if kind in (CATEGORICAL, BINARY) else "num"
    if isinstance(expr, N.Literal):
        return "str" if isinstance(expr.value, str) else "num"
    return "auto"


def _is_prob(expr):
    if isinstance(expr, (N.RelevanceProbability, N.DependenceProbability)):
        return True
    if isinstance(expr, N.Aggregate):
        return _is_prob(expr.inner)
    return False


def _contains_aggregate(expr):
    return any(isinstance(node, N.Aggregate) for node in _walk_value(expr))


def _eval_relevance(node: N.RelevanceProbability, session, pop, table):
    ensemble = session.require_models(pop)
    existing = []
    if node.existing is not None:
        if isinstance(node.existing, N.Select):
            keys = _exec_select(node.existing, session).single_column()
        else:
            keys = [lit.value for lit in node.existing]
        existing = [table.resolve_key(k) for k in keys]
    hypothetical = []
    for row in node.hypothetical:
        record = {}
        for name, lit in row:
            record[table.column_index(name)] = lit.value
        hypothetical.append(record)
    query = RelevanceQuery(
        context=table.column_index(node.context),
        existing=tuple(existing),
        hypothetical=tuple(hypothetical),
    )
    result = relevance_query(ensemble, query, pop.cache, seed=session.seed)
    for c, count in result.ignored_columns.items():
        session.warn(
            f"hypothetical value for {table.columns[c].name!r} ignored in "
            f"{count} of {ensemble.n_states} models (outside the context block)"
        )
    return result.probabilities


def _sort_key(value):
    if isinstance(value, (int, float, np.floating, np.integer)) and not isinstance(value, bool):
        return (0, float(value), "")
    return (1, 0.0, str(value))


def _truthy(value):
    return bool(value) if value is not None else False


def _numeric(value):
    if value is None:
        return None
    if isinstance(value, (int, float, np.floating, np.integer)) and not isinstance(value, bool):
        return float(value)
    raise BqlExecutionError(f"expected a number, got {value!r}")


def _values_equal(a, b):
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, str) or isinstance(b, str):
        if isinstance(a, str) and isinstance(b, str):
            return a == b
        s, other = (a, b) if isinstance(a, str) else (b, a)
        try:
            return float(s) == float(other)
        except (TypeError, ValueError):
            return False
    return a == b


def _compare(op, a, b):
    if a is None or b is None:
        return False
    if op == "=":
        return _values_equal(a, b)
    if op == "!=":
        return not _values_equal(a, b)
    if isinstance(a, str) or isinstance(b, str):
        try:
            a, b = float(a), float(b)
        except (TypeError, ValueError):
            a, b = str(a), str(b)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise BqlExecutionError(f"unknown comparison {op!r}")


def _like(value, pattern):
    if value is None:
        return False
    regex = ".*".join(re.escape(part) for part in pattern.split("%"))
    return re.fullmatch(regex, str(value), re.IGNORECASE) is not None


def _eval(expr, env: _Env, r: int):
    if isinstance(expr, N.Literal):
        return expr.value
    if isinstance(expr, N.ColumnRef):
        return env.cell(expr.name, r)
    if isinstance(expr, N.Neg):
        value = _numeric(_eval(expr.inner, env, r))
        return None if value is None else -value
    if isinstance(expr, N.RelevanceProbability):
        return float(env.model_values[expr][r])
    if isinstance(expr, N.DependenceProbability):
        return float(env.model_values[expr])
    if isinstance(expr, N.BinOp):
        if expr.op == "AND":
            return _truthy(_eval(expr.left, env, r)) and _truthy(_eval(expr.right, env, r))
        if expr.op == "OR":
            return _truthy(_eval(expr.left, env, r)) or _truthy(_eval(expr.right, env, r))
        a = _eval(expr.left, env, r)
        b = _eval(expr.right, env, r)
        if expr.op in ("=", "!=", "<", "<=", ">", ">="):
            return _compare(expr.op, a, b)
        a, b = _numeric(a), _numeric(b)
        if a is None or b is None:
            return None
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "/":
            return a / b
        raise BqlExecutionError(f"unknown operator {expr.op!r}")
    if isinstance(expr, N.NotOp):
        return not _truthy(_eval(expr.inner, env, r))
    if isinstance(expr, N.IsOp):
        eq = _values_equal(_eval(expr.left, env, r), _eval(expr.right, env, r))
        return not eq if expr.negated else eq
    if isinstance(expr, N.LikeOp):
        hit = _like(_eval(expr.left, env, r), expr.pattern)
        return not hit if expr.negated else hit
    if isinstance(expr, N.InOp):
        value = _eval(expr.left, env, r)
        if isinstance(expr.items, N.Select):
            members = env.subqueries[expr.items]
        else:
            members = [lit.value for lit in expr.items]
        hit = any(_values_equal(value, m) for m in members)
        return not hit if expr.negated else hit
    if isinstance(expr, N.Aggregate):
        raise BqlExecutionError("aggregate used outside the projection list")
    raise BqlExecutionError(f"cannot evaluate {type(expr).__name__}")


def _eval_aggregate(expr: N.Aggregate, env, rows):
    if expr.func != "AVG":
        raise BqlExecutionError(f"unknown aggregate {expr.func!r}")
    values = [_numeric(_eval(expr.inner, env, r)) for r in rows]
    values = [v for v in values if v is not None]
    if not values:
        return None
    return sum(values) / len(values)
