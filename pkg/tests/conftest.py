import numpy as np
import pytest
from hypothesis import settings

from fockforge.deformation import DeformationSpec

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# smooth, bounded-away-from-zero tabulated deformation used across modules
TABULATED_VALUES = [1.0 + 0.25 * np.sin(0.7 * n) / n for n in range(1, 129)]


@pytest.fixture(scope="session")
def identity():
    return DeformationSpec.identity(256)


@pytest.fixture(scope="session")
def q_half():
    return DeformationSpec.q_deformed(0.5, 256)


@pytest.fixture(scope="session")
def tabulated():
    return DeformationSpec.tabulated(TABULATED_VALUES)


@pytest.fixture(scope="session", params=["identity", "q_half", "tabulated"])
def any_spec(request):
    return request.getfixturevalue(request.param)
