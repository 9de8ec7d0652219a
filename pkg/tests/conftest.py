import os
import sys

import pytest

TESTS_DIR = os.path.dirname(__file__)
sys.path.insert(0, TESTS_DIR)

FIXTURE_DIR = os.path.join(TESTS_DIR, "fixtures")


@pytest.fixture(scope="session")
def fixture_dir() -> str:
    return FIXTURE_DIR
