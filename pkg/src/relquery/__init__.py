"""relquery: probabilistic search over sparse tabular data.

Fits an ensemble of CrossCat posterior samples over a table and answers an
SQL-like query language whose ranking primitive is context-specific
predictive relevance.
"""

__version__ = "0.1.0"

from .table import DataTable, ColumnSchema, StatType
from .crosscat import (
    CrossCatState, Ensemble, analyze, crp_weights, initialize_ensemble,
    prior_sample,
)
from .relevance import (
    CoOccurrenceCache, RelevanceQuery, RelevanceResult, build_cooccurrence,
    dependence_probability, relevance_fast, relevance_naive, relevance_query,
)
from .session import Session

__all__ = [
    "DataTable", "ColumnSchema", "StatType",
    "CrossCatState", "Ensemble", "analyze", "crp_weights",
    "initialize_ensemble", "prior_sample",
    "CoOccurrenceCache", "RelevanceQuery", "RelevanceResult",
    "build_cooccurrence", "dependence_probability", "relevance_fast",
    "relevance_naive", "relevance_query",
    "Session",
]
