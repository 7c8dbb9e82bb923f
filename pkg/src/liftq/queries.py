"""Built-in named queries.

Each builder takes a schema registry and a map from root name to the root's
expression (usually a named ``Const``) and returns a closed query tree.
"""

from __future__ import annotations

from .embed import Gensym, Query, eq, pure, record, size, tuple_
from .errors import UnknownCollection
from .types import INT, STRING


def _root(roots, name):
    try:
        return roots[name]
    except KeyError:
        raise UnknownCollection(f"query needs a root collection named {name!r}") from None


def records(reg, roots, g=None):
    """Books published by Pearson Education, one BookData row per author.

    books.withFilter(book => book.publisher == "Pearson Education")
         .flatMap(book => book.authors.map(author =>
             BookData(book.title, author.firstName + " " + author.lastName,
                      book.authors.size - 1)))
    """
    g = g or Gensym()
    book_data = reg["BookData"]
    return (
        Query(_root(roots, "books"), g)
        .with_filter(lambda book: eq(book["publisher"], pure("Pearson Education", STRING)))
        .flat_map(lambda book: Query(book["authors"], g).map(
            lambda author: record(
                book_data,
                book["title"],
                author["firstName"] + " " + author["lastName"],
                size(book["authors"]) - pure(1, INT),
            )).expr)
        .expr
    )


def equijoin(reg, roots, g=None):
    """Nested-loop equi-join of persons with the accounts they own."""
    g = g or Gensym()
    accounts = _root(roots, "accounts")
    return (
        Query(_root(roots, "persons"), g)
        .flat_map(lambda p: Query(accounts, g)
                  .filter(lambda a: eq(a["owner"], p["id"]))
                  .map(lambda a: tuple_(p["name"], a["balance"]))
                  .expr)
        .expr
    )


NAMED_QUERIES = {"records": records, "equijoin": equijoin}
