import pathlib

import pytest

from crossres.harness import load_config

ROOT = pathlib.Path(__file__).resolve().parents[1]
REFERENCE_CONFIG = ROOT / "configs" / "reference.json"


@pytest.fixture(scope="session")
def reference_config():
    return load_config(str(REFERENCE_CONFIG))


@pytest.fixture(scope="session")
def reference_problem(reference_config):
    return reference_config.problem
