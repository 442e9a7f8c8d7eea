import os
from pathlib import Path

import pytest
from hypothesis import settings as hypothesis_settings

from licnet.core.settings_manager import ENV_PREFIX, reset_settings_manager

SAMPLES = Path(__file__).resolve().parent.parent / "samples"

# solver calls are slow on the first example (imports, LAPACK warm-up)
hypothesis_settings.register_profile("licnet", deadline=None, max_examples=50)
hypothesis_settings.load_profile("licnet")


@pytest.fixture(autouse=True, scope="session")
def clean_environment():
    """Run every test on the built-in defaults, whatever the shell exports."""
    saved = {key: os.environ.pop(key) for key in list(os.environ) if key.startswith(ENV_PREFIX)}
    reset_settings_manager()
    yield
    os.environ.update(saved)
    reset_settings_manager()


@pytest.fixture
def fresh_settings():
    reset_settings_manager()
    yield
    reset_settings_manager()


@pytest.fixture
def samples_dir() -> Path:
    return SAMPLES
