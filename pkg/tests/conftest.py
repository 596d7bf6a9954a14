import pytest

from filpiv.selfcheck import RunCache


@pytest.fixture(scope="session")
def runs():
    """Session-wide cache of flow integrations shared across test modules."""
    return RunCache()
