from __future__ import annotations

import numpy as np
import pytest

from qslab import gen_explicit, gen_rickman_rug, gen_round_sphere, gen_snowflake_plane

SPHERE_SEED = 7


@pytest.fixture(scope="session")
def sphere():
    """Round sphere fixture, n=2000: the acceptance surface."""
    return gen_round_sphere(2000, seed=SPHERE_SEED)


@pytest.fixture(scope="session")
def fine_sphere():
    """Finer sphere for ring-cover experiments that need sub-0.1 ball radii."""
    return gen_round_sphere(18000, seed=SPHERE_SEED)


@pytest.fixture(scope="session")
def rug():
    """Rickman rug fixture: 100x100 grid, dimension 3, unit patch."""
    return gen_rickman_rug(100, 100, 3.0, extent=1.0)


@pytest.fixture(scope="session")
def snowflake():
    return gen_snowflake_plane(6000, 0.5, extent=1.0, seed=11)


@pytest.fixture()
def line3():
    """3-point line 0-1-2, unit weights: the module-wide micro fixture."""
    return gen_explicit([[0, 1, 2], [1, 0, 1], [2, 1, 0]], [1.0, 1.0, 1.0])


@pytest.fixture()
def two_point():
    return gen_explicit([[0, 1], [1, 0]], [0.5, 0.5])


def far_point(space, i: int) -> int:
    return int(space.distances_from(i).argmax())


def random_separated_pairs(space, n_pairs, min_sep, seed, pool=None):
    """Deterministic rejection sampling of point pairs at distance >= min_sep."""
    rng = np.random.default_rng([seed, 0xFA17])
    pool = np.arange(space.n_points) if pool is None else np.asarray(pool)
    out = []
    tries = 0
    while len(out) < n_pairs and tries < 200 * n_pairs:
        i, j = rng.choice(pool, size=2, replace=False)
        tries += 1
        if space.distance(int(i), int(j)) >= min_sep:
            out.append((int(i), int(j)))
    return out
