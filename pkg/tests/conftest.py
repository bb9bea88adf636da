"""Shared fixtures: the synthetic hand/object pair and small helpers."""

from __future__ import annotations

import numpy as np
import pytest

from engrasp.fixtures import (
    OBJECT_SIZE,
    box_mesh,
    calibration_samples,
    fixture_hand,
    stream_frames,
    write_fixtures,
)
from engrasp.synthesis.sampling import SamplingRegion
from engrasp.synthesis.pipeline import SynthesisParams, synthesize


@pytest.fixture(scope="session")
def hand():
    return fixture_hand()


@pytest.fixture(scope="session")
def cube():
    return box_mesh(OBJECT_SIZE, center=(0.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def region(cube):
    return SamplingRegion(target=cube, standoff=0.002, spin=4)


@pytest.fixture(scope="session")
def small_set(hand, region):
    """A handful of synthesized templates, shared across tests."""
    params = SynthesisParams(n=6, seed=1, step=0.005, delta=0.002)
    return synthesize(hand, region, params), params


@pytest.fixture(scope="session")
def cal_samples():
    return calibration_samples()


@pytest.fixture(scope="session")
def frames():
    return stream_frames(30)


@pytest.fixture(scope="session")
def fixture_tree(tmp_path_factory):
    """On-disk copy of the synthetic fixtures for file-based tests."""
    root = tmp_path_factory.mktemp("fixtures")
    write_fixtures(root)
    return root


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)
