import os

import numpy as np
import pytest

from combgen import presets


def pytest_collection_modifyitems(config, items):
    if os.environ.get("COMBGEN_LARGE_SCALE") == "1":
        return
    skip = pytest.mark.skip(
        reason="full-size run; set COMBGEN_LARGE_SCALE=1 to include")
    for item in items:
        if "large_scale" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def toy():
    return presets.toy_generator()


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
