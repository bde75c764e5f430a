# pytest plugin: acceptance-size property runs are opt-in
import functools
import os
import sys

import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--exhaustive", action="store_true", help="run acceptance-size property tests"
    )


def exhaustive_enabled():
    # Detect --exhaustive in sys.argv or PYTEST_ADDOPTS
    cli_args = sys.argv + os.environ.get("PYTEST_ADDOPTS", "").split()
    return "--exhaustive" in cli_args


def exhaustive(test_func):
    """Decorator to skip acceptance-size tests unless --exhaustive is given."""

    @functools.wraps(test_func)
    def wrapper(*args, **kwargs):
        if not exhaustive_enabled():
            pytest.skip("need --exhaustive option to run")
        return test_func(*args, **kwargs)

    return wrapper
