import importlib.resources

import numpy as np
import pytest


def scenario_path(name: str) -> str:
    """Filesystem path of a bundled scenario JSON."""
    return str(importlib.resources.files("masounder").joinpath(f"scenarios/{name}.json"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
