import numpy as np
import pytest

from planarm.kinematics import ArmModel


@pytest.fixture
def unit_arm() -> ArmModel:
    """Two unit links, zero link radius, generous limits."""
    return ArmModel(
        link_lengths=(1.0, 1.0),
        joint_limits=((-np.pi, np.pi), (-np.pi, np.pi)),
        link_radius=0.0,
    )


@pytest.fixture
def three_link_arm() -> ArmModel:
    return ArmModel(
        link_lengths=(1.0, 1.0, 0.5),
        joint_limits=((-np.pi, np.pi),) * 3,
        link_radius=0.0,
    )


def random_arm(rng: np.random.Generator, max_links: int = 4) -> ArmModel:
    n = int(rng.integers(1, max_links + 1))
    lengths = tuple(float(x) for x in rng.uniform(0.2, 1.0, size=n))
    return ArmModel(
        link_lengths=lengths,
        joint_limits=((-np.pi, np.pi),) * n,
        link_radius=float(rng.uniform(0.0, 0.08)),
    )
