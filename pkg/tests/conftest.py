import sys
from pathlib import Path

import pytest

from simplexsc import backend

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(params=backend.available_backends())
def each_backend(request):
    """Run the decorated test once per available kernel backend."""
    previous = backend.use(request.param)
    yield request.param
    backend.use(previous)
