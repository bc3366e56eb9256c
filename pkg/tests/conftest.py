import pytest

from data.cache import get_cache
from utils.progress import progress


@pytest.fixture(autouse=True)
def clean_state():
    """Fresh bound cache and no live display for every test."""
    get_cache().clear()
    progress.enabled = False
    yield
    progress.stop()
