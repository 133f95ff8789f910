import numpy as np
import pytest

from backaction_lab import config
from backaction_lab.backaction import BackActionContext
from backaction_lab.core import random_hermitian, random_state


@pytest.fixture(autouse=True)
def _default_settings():
    # Every test starts from, and leaves behind, the stock settings.
    previous = config.set_settings(**vars(config.Settings()))
    yield
    config.set_settings(**vars(previous))


def make_context(seed, dim=3, hbar=None):
    seeds = np.random.SeedSequence(seed).generate_state(3, dtype=np.uint32).tolist()
    return BackActionContext(random_hermitian(dim, seeds[0]), random_state(dim, seeds[1]),
                             random_state(dim, seeds[2]), hbar)


@pytest.fixture
def ctx3():
    return make_context(1234, dim=3)
