from functools import lru_cache

import pytest

from genxy.meanfield import solve_mf
from genxy.tsc import solve_tsc


@lru_cache(maxsize=None)
def mf_report(p):
    return solve_mf(p)


@lru_cache(maxsize=None)
def tsc_report(p):
    return solve_tsc(p)


@pytest.fixture(scope="session")
def mf():
    return mf_report


@pytest.fixture(scope="session")
def tsc():
    return tsc_report
