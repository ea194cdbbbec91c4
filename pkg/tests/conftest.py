"""Shared fixtures: one generated scenario reused across the suite."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from caseboard.scenario import generate_scenario


@pytest.fixture(scope="session")
def scenario():
    """(graph, store, ground truth) for one fixed seed."""
    return generate_scenario(3)


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    """The same scenario written to disk, for loader/CLI/service tests."""
    out = tmp_path_factory.mktemp("dataset") / "d3"
    generate_scenario(3, out_dir=out)
    return out
