from __future__ import annotations

import pytest

from videoreseq.synth import save_clip, tour_clip


@pytest.fixture(scope="session")
def tour16():
    """Small deterministic clip shared by tests that just need frames."""
    return tour_clip(n=16, size=48, square=8, seed=0)


@pytest.fixture(scope="session")
def tour16_manifest(tour16, tmp_path_factory):
    """The same clip written to disk as a loadable dataset."""
    out = tmp_path_factory.mktemp("tour16")
    return save_clip(tour16, str(out))
