import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bridgeloss.conductivity import AL, TA  # noqa: E402


@pytest.fixture
def al():
    return AL


@pytest.fixture
def ta():
    return TA
