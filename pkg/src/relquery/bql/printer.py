"""Canonical statement rendering.  parse(to_bql(parse(text))) is a fixed
point: compound expressions print fully parenthesized and every column
reference is quoted, so the canonical text reparses to an equal tree."""

from __future__ import annotations

import re

from . import nodes as N
from .lexer import KEYWORDS

_BARE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _name(name: str) -> str:
    if _BARE.match(name) and name.upper() not in KEYWORDS:
        return name
    return f'"{name}"'


def _q(name: str) -> str:
    return f'"{name}"'


def _string(s: str) -> str:
    return "'" + s.replace("'", "''") + "'"


def _literal(value) -> str:
    if isinstance(value, str):
        return _string(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def expr_to_bql(e) -> str:
    if isinstance(e, N.Literal):
        return _literal(e.value)
    if isinstance(e, N.ColumnRef):
        return _q(e.name)
    if isinstance(e, N.Neg):
        return f"-{expr_to_bql(e.inner)}"
    if isinstance(e, N.BinOp):
        return f"({expr_to_bql(e.left)} {e.op} {expr_to_bql(e.right)})"
    if isinstance(e, N.NotOp):
        return f"(NOT {expr_to_bql(e.inner)})"
    if isinstance(e, N.IsOp):
        word = "IS NOT" if e.negated else "IS"
        return f"({expr_to_bql(e.left)} {word} {expr_to_bql(e.right)})"
    if isinstance(e, N.LikeOp):
        word = "NOT LIKE" if e.negated else "LIKE"
        return f"({expr_to_bql(e.left)} {word} {_string(e.pattern)})"
    if isinstance(e, N.InOp):
        word = "NOT IN" if e.negated else "IN"
        if isinstance(e.items, N.Select):
            inner = to_bql(e.items)
        else:
            inner = ", ".join(_literal(lit.value) for lit in e.items)
        return f"({expr_to_bql(e.left)} {word} ({inner}))"
    if isinstance(e, N.Aggregate):
        return f"{e.func}({expr_to_bql(e.inner)})"
    if isinstance(e, N.DependenceProbability):
        return f"DEPENDENCE PROBABILITY OF {_q(e.col1)} WITH {_q(e.col2)}"
    if isinstance(e, N.RelevanceProbability):
        parts = ["RELEVANCE PROBABILITY TO"]
        if e.existing is not None:
            if isinstance(e.existing, N.Select):
                spec = f"({to_bql(e.existing)})"
            else:
                spec = "(" + ", ".join(_literal(l.value) for l in e.existing) + ")"
            parts.append(f"EXISTING ROWS IN {spec}")
            if e.hypothetical:
                parts.append("AND")
        if e.hypothetical:
            rows = ", ".join(
                "(" + ", ".join(f"{_q(n)} = {_literal(l.value)}" for n, l in row) + ")"
                for row in e.hypothetical
            )
            parts.append(f"HYPOTHETICAL ROWS WITH VALUES ({rows})")
        parts.append(f"IN THE CONTEXT OF {_q(e.context)}")
        return " ".join(parts)
    raise TypeError(f"cannot print expression: {e!r}")


def to_bql(stmt) -> str:
    if isinstance(stmt, N.Select):
        head = "ESTIMATE" if stmt.estimate else "SELECT"
        if stmt.items is None:
            items = "*"
        else:
            rendered = []
            for p in stmt.items:
                text = expr_to_bql(p.expr)
                if p.alias:
                    text += f" AS {_q(p.alias)}"
                rendered.append(text)
            items = ", ".join(rendered)
        out = f"{head} {items} FROM {_name(stmt.source)}"
        if stmt.where is not None:
            out += f" WHERE {expr_to_bql(stmt.where)}"
        if stmt.order_by is not None:
            expr, desc = stmt.order_by
            out += f" ORDER BY {expr_to_bql(expr)}"
            if desc:
                out += " DESC"
        if stmt.limit is not None:
            out += f" LIMIT {stmt.limit}"
        return out
    if isinstance(stmt, N.CreateTable):
        out = f"CREATE TABLE {_name(stmt.name)} FROM {_string(stmt.path)}"
        if stmt.key:
            out += f" WITH KEY {_q(stmt.key)}"
        return out
    if isinstance(stmt, N.CreatePopulation):
        directives = " ".join(_directive(d) + ";" for d in stmt.directives)
        out = f"CREATE POPULATION {_name(stmt.name)} FOR {_name(stmt.table)} WITH SCHEMA ({directives})"
        if stmt.baseline:
            out += f" WITH BASELINE {_name(stmt.baseline)}"
        return out
    if isinstance(stmt, N.InitializeModels):
        out = f"INITIALIZE {stmt.n_models} MODELS"
        if stmt.population:
            out += f" FOR {_name(stmt.population)}"
        if stmt.baseline:
            out += f" WITH BASELINE {_name(stmt.baseline)}"
        return out
    if isinstance(stmt, N.AnalyzeStmt):
        unit = stmt.unit.upper()
        return f"ANALYZE {_name(stmt.population)} FOR {_literal(stmt.amount)} {unit}"
    if isinstance(stmt, N.PairwiseDependence):
        return (
            "ESTIMATE DEPENDENCE PROBABILITY FROM PAIRWISE VARIABLES OF "
            + _name(stmt.population)
        )
    raise TypeError(f"cannot print statement: {stmt!r}")


def _directive(d) -> str:
    if isinstance(d, N.GuessTypes):
        return "GUESS STATISTICAL TYPES FOR (*)"
    if isinstance(d, N.SetStatType):
        return f"SET STATTYPES OF {_q(d.column)} TO {d.stattype.upper()}"
    raise TypeError(f"cannot print directive: {d!r}")
