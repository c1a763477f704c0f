from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("opentri", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("opentri")


@pytest.fixture(scope="session")
def flat():
    from opentri.warping import const
    return const()


@pytest.fixture(scope="session")
def hyp():
    from opentri.warping import cosh
    return cosh()


@pytest.fixture(scope="session")
def sphere_band():
    from opentri.warping import cos_truncated
    return cos_truncated()
