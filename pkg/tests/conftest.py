import time

import pytest

from querygen import queries

SUITE_SIZE = 500


class Suite(list):
    """Generated queries plus the time it took to generate them."""

    seconds = 0.0


@pytest.fixture(scope="session")
def suite():
    """The shared corpus of generated queries used by the property suites."""
    start = time.perf_counter()
    s = Suite(queries(SUITE_SIZE, seed=2024))
    s.seconds = time.perf_counter() - start
    return s
