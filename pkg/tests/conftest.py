import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from voroseg.raster_io import Image  # noqa: E402

ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image(rng, width, height, levels=None) -> Image:
    if levels is None:
        arr = rng.integers(0, 256, size=(height, width, 3))
    else:
        palette = rng.integers(0, 256, size=(levels, 3))
        arr = palette[rng.integers(0, levels, size=(height, width))]
    return Image(width, height, arr.astype(np.uint8))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{status}  {name}" + (f"  ({detail})" if detail else ""))
