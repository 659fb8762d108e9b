"""AST node types.  All nodes are frozen dataclasses with tuple children,
so parse trees compare by value (the pretty-print fixed-point tests rely
on this) and can serve as dictionary keys during planning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union


# -- scalar / boolean expressions -------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: object  # int | float | str


@dataclass(frozen=True)
class ColumnRef:
    name: str


@dataclass(frozen=True)
class Neg:
    inner: object


@dataclass(frozen=True)
class BinOp:
    op: str  # = != < <= > >= + - * / AND OR
    left: object
    right: object


@dataclass(frozen=True)
class NotOp:
    inner: object


@dataclass(frozen=True)
class IsOp:
    left: object
    right: object
    negated: bool


@dataclass(frozen=True)
class LikeOp:
    left: object
    pattern: str
    negated: bool


@dataclass(frozen=True)
class InOp:
    left: object
    items: object  # tuple[Literal, ...] | Select
    negated: bool


@dataclass(frozen=True)
class Aggregate:
    func: str  # AVG
    inner: object


@dataclass(frozen=True)
class RelevanceProbability:
    context: str
    existing: object = None       # None | tuple[Literal, ...] | Select
    hypothetical: tuple = ()      # tuple of rows; row = tuple[(column, Literal), ...]


@dataclass(frozen=True)
class DependenceProbability:
    col1: str
    col2: str


# -- statements ---------------------------------------------------------------

@dataclass(frozen=True)
class Projection:
    expr: object
    alias: Optional[str] = None


@dataclass(frozen=True)
class Select:
    items: Optional[tuple]        # None means '*'
    source: str
    where: object = None
    order_by: object = None       # (expr, descending: bool)
    limit: Optional[int] = None
    estimate: bool = False


@dataclass(frozen=True)
class CreateTable:
    name: str
    path: str
    key: Optional[str] = None


@dataclass(frozen=True)
class GuessTypes:
    pass


@dataclass(frozen=True)
class SetStatType:
    column: str
    stattype: str


@dataclass(frozen=True)
class CreatePopulation:
    name: str
    table: str
    directives: tuple = ()
    baseline: Optional[str] = None


@dataclass(frozen=True)
class InitializeModels:
    n_models: int
    population: Optional[str] = None
    baseline: Optional[str] = None


@dataclass(frozen=True)
class AnalyzeStmt:
    population: str
    amount: Union[int, float]
    unit: str  # iterations | seconds | minutes


@dataclass(frozen=True)
class PairwiseDependence:
    population: str
