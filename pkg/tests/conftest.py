# conftest.py
import pytest

from src.constructions import a0
from src.group_core import fibre_decompose

# pytest              # slow tests skipped
# pytest --run-slow   # exhaustive searches and n = 4 runs included


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return  # Don't skip anything

    skip_slow = pytest.mark.skip(reason="Need --run-slow to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run tests marked as slow",
    )


@pytest.fixture
def a0_set():
    return a0()


@pytest.fixture
def a0_family(a0_set):
    return fibre_decompose(a0_set)
