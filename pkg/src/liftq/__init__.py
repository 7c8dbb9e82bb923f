"""Reified collection queries: typed expression trees, a rewrite optimizer
and an instrumented interpreter."""

from .data import gen_join_benchmark, load_data, load_descriptor, root_consts
from .embed import (
    Gensym,
    Query,
    SchemaRegistry,
    fun,
    pure,
    query_filter,
    query_flat_map,
    query_map,
    register_schema,
)
from .errors import QueryError
from .expr import alpha_equal, type_of
from .interp import CostCounters, interpret, interpret_closed
from .optimizer import make_pipeline, optimize
from .plan import parse_plan, print_plan
from .types import BOOL, DOUBLE, INT, SEQ, SET, STRING

__all__ = [
    "BOOL", "DOUBLE", "INT", "SEQ", "SET", "STRING",
    "CostCounters", "Gensym", "Query", "QueryError", "SchemaRegistry",
    "alpha_equal", "fun", "gen_join_benchmark", "interpret", "interpret_closed",
    "load_data", "load_descriptor", "make_pipeline", "optimize", "parse_plan",
    "print_plan", "pure", "query_filter", "query_flat_map", "query_map",
    "register_schema", "root_consts", "type_of",
]
