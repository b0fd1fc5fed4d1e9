"""Shared fixtures for the og6-lattice test suite.

``og6_lattice.config.settings`` is a process-wide singleton that the CLI
mutates from its global options, so every test gets it restored afterwards.
"""

import os
from pathlib import Path

import pytest
import yaml

# Keep a developer's .env or shell from changing budgets under the tests.
_TEST_ENV_DEFAULTS = {
    "OG6_JOBS": "1",
    "OG6_LOG_LEVEL": "WARNING",
}

for key, value in _TEST_ENV_DEFAULTS.items():
    os.environ.setdefault(key, value)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def restore_settings():
    from og6_lattice.config import settings

    snapshot = settings.model_dump()
    yield settings
    for key, value in snapshot.items():
        setattr(settings, key, value)


@pytest.fixture(scope="session")
def lattice_corpus() -> list[dict]:
    with (FIXTURES / "lattices.yaml").open(encoding="utf-8") as fh:
        return yaml.safe_load(fh)["lattices"]


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return FIXTURES / "lattices.yaml"


@pytest.fixture(scope="session")
def classification():
    """The full classification over every candidate order (slow; computed once)."""
    from og6_lattice.pipeline import assemble_theorem

    return assemble_theorem(jobs=1)
