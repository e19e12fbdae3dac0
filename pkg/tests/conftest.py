import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from mapfx.fixtures import load_fixture, load_fixture_plan


@pytest.fixture(scope="session")
def scenario1():
    return load_fixture("scenario1")


@pytest.fixture(scope="session")
def scenario1_plan1():
    return load_fixture_plan("scenario1", "scenario1_plan1")


@pytest.fixture(scope="session")
def scenario1_plan2():
    return load_fixture_plan("scenario1", "scenario1_plan2")


@pytest.fixture(scope="session")
def scenario6():
    return load_fixture("scenario6")


@pytest.fixture(scope="session")
def m1():
    return load_fixture("m1")


@pytest.fixture(scope="session")
def m1_plan():
    return load_fixture_plan("m1")


@pytest.fixture(scope="session")
def m1_3x5():
    return load_fixture("m1_3x5")


@pytest.fixture(scope="session")
def m1_3x5_plan():
    return load_fixture_plan("m1_3x5")
