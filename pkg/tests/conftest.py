from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from core.engine import InequalitySpec
from core.geometry import GrushinSpace
from core.params import CknParams

CONFIG_DIR = Path(__file__).resolve().parents[1] / "core" / "cli" / "configs"

SPACES = {
    "heisenberg_like": GrushinSpace(1, 1, 1),
    "fractional": GrushinSpace(2, 3, 0.5),
    "steep": GrushinSpace(3, 1, 2),
}


@pytest.fixture(params=sorted(SPACES), ids=sorted(SPACES))
def space(request):
    return SPACES[request.param]


@pytest.fixture
def plane():
    """(d, k, mu) = (1, 1, 1), Q = 3."""
    return GrushinSpace(1, 1, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def admissible_ckn():
    F = Fraction
    return CknParams(p=F(2), q=F(2), r=F(3), a=F(1, 2), alpha=F(0), beta=F(0), sigma=F(0))


@pytest.fixture
def admissible_spec(plane, admissible_ckn):
    return InequalitySpec("ckn", plane, admissible_ckn)


@pytest.fixture
def config_dir():
    return CONFIG_DIR
