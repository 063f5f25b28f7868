import numpy as np
import pytest

from lgmix import SpectralSpec, build_system


@pytest.fixture
def jordan_2x2_09():
    """The 2x2 single-block system with eigenvalue 0.9 (k_hat = 35)."""
    return build_system(SpectralSpec(blocks=((0.9, 2),), similarity="identity", seed=1))


@pytest.fixture
def scalar_05():
    """Scalar system x' = 0.5 x + w (stationary variance 4/3)."""
    return np.array([[0.5]])


@pytest.fixture
def case_study_system():
    """The 50-dimensional two-block system: 1.5 on a 47-block, -0.5 on a 3-block."""
    spec = SpectralSpec(
        blocks=((1.5, 47), (-0.5, 3)), similarity="random-orthogonal", seed=7
    )
    return build_system(spec)


def random_stable_spec(rng: np.random.Generator, max_blocks=3, max_size=12) -> SpectralSpec:
    """A random stable spec with |lambda| in [0.3, 0.95] and modest blocks."""
    n_blocks = int(rng.integers(1, max_blocks + 1))
    blocks = []
    for _ in range(n_blocks):
        lam = float(rng.uniform(0.3, 0.95)) * (1 if rng.random() < 0.5 else -1)
        size = int(rng.integers(1, max_size + 1))
        blocks.append((lam, size))
    similarity = "identity" if rng.random() < 0.5 else "random-orthogonal"
    return SpectralSpec(
        blocks=tuple(blocks), similarity=similarity, seed=int(rng.integers(0, 2**31))
    )
