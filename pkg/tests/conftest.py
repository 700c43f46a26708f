import random

import pytest

from vermat.pairing_core import suite_toy


@pytest.fixture
def toy101():
    return suite_toy(101)


@pytest.fixture
def toy2503():
    return suite_toy(2503)


@pytest.fixture(scope="session")
def real():
    pytest.importorskip("py_ecc")
    from vermat.pairing_core import suite_real
    return suite_real()


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(autouse=True)
def _no_env_overrides(monkeypatch):
    """Tests run with production verification and a single worker unless they say otherwise."""
    from vermat.config import config
    monkeypatch.setattr(config, "VERIFY_MODE", "production")
    monkeypatch.setattr(config, "WORKERS", 1)
