import hypothesis
import numpy as np
import pytest

from dmac.dynamics import build_network
from dmac.graph import generate_line, generate_tree

np.seterr(all="raise", under="ignore")

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture
def small_tree_net():
    return build_network(generate_tree(20, 3), 0.1, 2, 3, true_index=1)


@pytest.fixture
def line2_net():
    return build_network(generate_line(2), 0.1, 2, 0, true_index=1)
