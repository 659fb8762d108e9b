"""Session state: named tables and populations, seeded model management,
and single-statement execution shared by the REPL, script runner, and
HTTP service."""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import store
from .bql import parse, parse_script
from .bql.evaluate import ResultTable, execute
from .crosscat import Ensemble, analyze, initialize_ensemble
from .errors import BqlExecutionError, IngestError
from .relevance import CoOccurrenceCache
from .table import DataTable


@dataclass
class Population:
    name: str
    table: DataTable
    ensemble: Optional[Ensemble] = None
    cache: Optional[CoOccurrenceCache] = None


def _derived_seed(seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:6], "big")


class Session:
    """One interactive or service-backed session over loaded data."""

    def __init__(self, seed: int = 0, default_models: int = 16, data_dir=None):
        self.seed = int(seed)
        self.default_models = default_models
        self.data_dir = Path(data_dir) if data_dir else None
        self.tables = {}
        self.populations = {}
        self.history = []
        self.warnings = []
        self.lock = threading.RLock()

    # -- helpers used by the evaluator ------------------------------------

    def warn(self, message: str):
        self.warnings.append(message)

    def _resolve_path(self, path: str) -> Path:
        p = Path(path)
        if p.is_file():
            return p
        if self.data_dir and (self.data_dir / path).is_file():
            return self.data_dir / path
        stem = Path(path).stem
        try:
            return store.dataset_path(stem)
        except IngestError:
            raise BqlExecutionError(f"cannot find CSV file {path!r}")

    def create_table(self, name, path, key=None, strip_thousands=False):
        table = store.load_csv(self._resolve_path(path), key=key,
                               strip_thousands=strip_thousands)
        self.tables[name] = table
        return table

    def create_population(self, name, table_name, directives=(), baseline=None):
        if baseline not in (None, "crosscat"):
            raise BqlExecutionError(f"unknown baseline {baseline!r}; only crosscat exists")
        if table_name in self.tables:
            table = self.tables[table_name]
        elif table_name in self.populations:
            table = self.populations[table_name].table
        else:
            raise BqlExecutionError(f"unknown table {table_name!r}")
        for d in directives:
            type_name = type(d).__name__
            if type_name == "GuessTypes":
                continue  # types are guessed at CSV load time
            if type_name == "SetStatType":
                table = store.retype_column(table, d.column, d.stattype)
            else:
                raise BqlExecutionError(f"unknown schema directive {type_name}")
        pop = Population(name, table)
        self.populations[name] = pop
        return pop

    def find_population(self, name) -> Optional[Population]:
        return self.populations.get(name)

    def table_for(self, name) -> DataTable:
        if name in self.tables:
            return self.tables[name]
        raise BqlExecutionError(f"unknown table or population {name!r}")

    def population_for(self, name) -> Population:
        if name is None:
            if len(self.populations) == 1:
                return next(iter(self.populations.values()))
            raise BqlExecutionError("statement needs an explicit population name")
        pop = self.populations.get(name)
        if pop is None:
            raise BqlExecutionError(f"unknown population {name!r}")
        return pop

    def initialize_models(self, pop: Population, n_models: int, baseline=None):
        if baseline not in (None, "crosscat"):
            raise BqlExecutionError(f"unknown baseline {baseline!r}; only crosscat exists")
        if n_models < 1:
            raise BqlExecutionError("INITIALIZE needs at least 1 model")
        pop.ensemble = initialize_ensemble(
            pop.table, n_models, _derived_seed(self.seed, pop.name))
        pop.cache = CoOccurrenceCache(pop.ensemble)
        return pop.ensemble

    def analyze_population(self, pop: Population, amount, unit):
        ensemble = self.require_models(pop)
        if unit == "iterations":
            analyze(ensemble, pop.table, iterations=int(amount))
        elif unit == "seconds":
            analyze(ensemble, pop.table, seconds=float(amount))
        elif unit == "minutes":
            analyze(ensemble, pop.table, seconds=float(amount) * 60.0)
        else:
            raise BqlExecutionError(f"unknown ANALYZE unit {unit!r}")
        return ensemble.analyze_iterations

    def require_models(self, pop) -> Ensemble:
        if pop is None:
            raise BqlExecutionError("model expressions need a population (CREATE POPULATION first)")
        if pop.ensemble is None:
            raise BqlExecutionError(
                f"population {pop.name!r} has no models; run INITIALIZE ... MODELS and ANALYZE")
        return pop.ensemble

    # -- statement execution ----------------------------------------------

    def execute(self, text: str) -> ResultTable:
        """Parse and run a single statement; returns its result table."""
        with self.lock:
            self.warnings = []
            stmt = parse(text)
            result = execute(stmt, self)
            self.history.append(text)
            return result

    def execute_script(self, text: str):
        """Run every statement in a script; yields (statement, result)."""
        statements = parse_script(text)
        out = []
        for stmt in statements:
            with self.lock:
                self.warnings = []
                result = execute(stmt, self)
                self.history.append(stmt)
            out.append((stmt, result))
        return out

    def schema_summary(self):
        out = {}
        for name, pop in self.populations.items():
            out[name] = [
                {"name": c.name, "stat_type": c.stat_type.kind,
                 "arity": c.stat_type.arity or None}
                for c in pop.table.columns
            ]
        for name, table in self.tables.items():
            if name not in out:
                out[name] = [
                    {"name": c.name, "stat_type": c.stat_type.kind,
                     "arity": c.stat_type.arity or None}
                    for c in table.columns
                ]
        return out
