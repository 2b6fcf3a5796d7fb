import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import meanineq


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile every jitted kernel before any timed test runs."""
    meanineq.warmup()
