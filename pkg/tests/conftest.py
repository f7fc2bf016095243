import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from bcsa.dist import DegreeDistribution


@pytest.fixture
def example_dist():
    return DegreeDistribution.from_string("0.5x^2+0.5x^4")


@pytest.fixture
def tuned_dist():
    return DegreeDistribution.from_string("0.86x^3+0.14x^8")
