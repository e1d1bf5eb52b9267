"""Test-space generators: round sphere, Rickman rug, snowflaked plane, explicit.

All generators are deterministic given their configuration and seed and
produce strictly positive weights.  Planar patches carry boundary; probes
should stay away from it (see ``interior_ids``).
"""
from __future__ import annotations

import numpy as np

from .errors import InputError, ValidationError
from .space import DiscreteSpace, MetricSpec


def _random_rotation(seed: int) -> np.ndarray:
    """Uniform random 3x3 rotation, deterministic in the seed."""
    rng = np.random.default_rng([int(seed), 0x51AB])
    m = rng.standard_normal((3, 3))
    q, r = np.linalg.qr(m)
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def gen_round_sphere(n: int, seed: int = 0) -> DiscreteSpace:
    """Fibonacci lattice on the unit sphere, chordal metric, weights 4*pi/n.

    The lattice itself is deterministic; the seed only rotates it rigidly,
    so the mesh scale is seed-independent.
    """
    if n < 10:
        raise InputError("sphere sample needs n >= 10")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    pts = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    pts = pts @ _random_rotation(seed).T
    weights = np.full(n, 4.0 * np.pi / n)
    return DiscreteSpace(pts, weights, MetricSpec.chordal_sphere())


def gen_rickman_rug(n_x: int, n_y: int, dimension: float, extent: float = 1.0) -> DiscreteSpace:
    """Uniform grid of cell centers on [0, extent]^2 with the rug product metric.

    Cell weights are coordinate Lebesgue mass, the discrete stand-in for the
    product of length and snowflaked-length measures (equal up to a constant).
    """
    if n_x < 2 or n_y < 2:
        raise InputError("rug grid needs n_x, n_y >= 2")
    if dimension <= 2.0:
        raise InputError("rug dimension must be > 2")
    if extent <= 0.0:
        raise InputError("extent must be positive")
    xs = (np.arange(n_x) + 0.5) * (extent / n_x)
    ys = (np.arange(n_y) + 0.5) * (extent / n_y)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    weights = np.full(n_x * n_y, extent * extent / (n_x * n_y))
    return DiscreteSpace(pts, weights, MetricSpec.rickman_rug(dimension))


def gen_snowflake_plane(n: int, epsilon: float, extent: float = 1.0,
                        seed: int = 0) -> DiscreteSpace:
    """Uniform random points in [0, extent]^2 under the snowflaked metric d^eps."""
    if not (0.0 < epsilon < 1.0):
        raise InputError("snowflake exponent must lie in (0, 1)")
    if n < 2:
        raise InputError("need n >= 2 points")
    rng = np.random.default_rng([int(seed), 0x5F0A])
    pts = rng.uniform(0.0, extent, size=(n, 2))
    weights = np.full(n, extent * extent / n)
    return DiscreteSpace(pts, weights, MetricSpec.snowflake(epsilon))


def gen_explicit(matrix, weights, coords=None) -> DiscreteSpace:
    """Space wrapping an explicit distance matrix, validated on construction.

    Symmetry, zero diagonal and nonnegativity are always checked; the
    triangle inequality is checked on all triples for n <= 256 and on
    random triples beyond that.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("distance matrix must be square")
    n = m.shape[0]
    if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise ValidationError("distance matrix must be symmetric")
    if np.any(np.diag(m) != 0):
        raise ValidationError("distance matrix must have zero diagonal")
    if np.any(m < 0):
        raise ValidationError("distances must be nonnegative")
    tol = 1e-9 * max(1.0, float(m.max()))
    if n <= 256:
        for k in range(n):
            slack = m - (m[:, k][:, None] + m[k][None, :])
            if np.any(slack > tol):
                i, j = np.unravel_index(int(np.argmax(slack)), slack.shape)
                raise ValidationError(
                    f"triangle inequality fails on triple ({i}, {k}, {j}): "
                    f"d={m[i, j]:.6g} > {m[i, k]:.6g} + {m[k, j]:.6g}")
        space = DiscreteSpace(coords if coords is not None else np.zeros((n, 0)),
                              weights, MetricSpec.explicit(m))
    else:
        space = DiscreteSpace(coords if coords is not None else np.zeros((n, 0)),
                              weights, MetricSpec.explicit(m))
        space.validate_metric_axioms(n_triples=10_000, seed=0)
    return space


def interior_ids(space: DiscreteSpace, margin: float = 0.1) -> np.ndarray:
    """Point ids away from the bounding-box boundary of a planar patch.

    Boundary-free spaces (spheres, explicit matrices) return all ids.
    """
    if space.metric.variant in ("ChordalSphere", "ExplicitMatrix") or space.coords.size == 0:
        return np.arange(space.n_points)
    lo = space.coords.min(axis=0)
    hi = space.coords.max(axis=0)
    pad = margin * (hi - lo)
    keep = np.all((space.coords >= lo + pad) & (space.coords <= hi - pad), axis=1)
    return np.flatnonzero(keep)
