import pytest
from hypothesis import settings

from canham import KernelSpec

settings.register_profile("pkg", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("pkg")

# Reference kernels: a C-infinity bump of total mass 0.9 on (0, 1) and a jump-at-zero exponential.
BUMP = KernelSpec.bump_with_mass(0.9, 1.0)
EXP = KernelSpec.exponential(0.5, 1.0)


@pytest.fixture
def bump():
    return BUMP


@pytest.fixture
def exp_kernel():
    return EXP
