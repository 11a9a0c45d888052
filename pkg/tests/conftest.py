import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from bic_explore.config import consume_load_warnings  # noqa: E402
from bic_explore.prior_model import ContinuousSetting, DiscretePrior, UniformPrior, validate  # noqa: E402


@pytest.fixture(autouse=True)
def _drain_load_warnings():
    consume_load_warnings()
    yield
    consume_load_warnings()


@pytest.fixture
def prior_a():
    return validate(DiscretePrior.from_lists((0.4, 0.3, 0.3), (0.1, 0.05)))


@pytest.fixture
def two_action_prior():
    return validate(DiscretePrior.from_lists((0.3, 0.4, 0.3), (0.2,)))


@pytest.fixture
def uniform_setting():
    return ContinuousSetting(UniformPrior(), (0.4,))
