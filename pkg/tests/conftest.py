import math
from functools import lru_cache

import pytest
from hypothesis import settings

from halfdisk.geometry import make_partition
from halfdisk.mesh import generate_initial

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = {}


@lru_cache(maxsize=None)
def canonical_mesh(symmetric=False):
    return generate_initial(make_partition(math.pi / 4), symmetric=symmetric)


@pytest.fixture(scope="session")
def mesh0():
    return canonical_mesh()


@pytest.fixture(scope="session")
def mesh2(mesh0):
    return mesh0.refined(2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
