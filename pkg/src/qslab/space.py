"""Discrete metric measure spaces with fast ball and pair-ball queries.

A DiscreteSpace is a finite weighted point cloud together with a metric
given either by a formula on coordinates (Euclidean, chordal sphere,
snowflake, Rickman rug) or by an explicit distance matrix.  All measure
queries use the open-ball convention (strict ``<``); graph adjacency used
for connectivity surrogates is closed (``<=``), see ``proximity_graph``.

Scale conventions:
  * mesh_scale        -- max over points of the distance to the nearest
                         other point; the resolution floor of the sample.
  * connectivity_scale-- smallest radius at which the closed-adjacency
                         graph is connected (bisected upper bound).
  * proximity_scale   -- radius of the proximity graph used for
                         connectivity certificates.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputError, ValidationError

KNOWN_VARIANTS = ("Euclidean", "ChordalSphere", "Snowflake", "RickmanRug", "ExplicitMatrix")

_EXACT_DIAMETER_LIMIT = 4096
_NN_CANDIDATES = 17


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """Metric formula specification for a DiscreteSpace."""

    variant: str
    epsilon: float | None = None      # Snowflake exponent, in (0, 1]
    dimension: float | None = None    # RickmanRug dimension, > 2
    matrix: np.ndarray | None = None  # ExplicitMatrix distances

    def __post_init__(self):
        if self.variant not in KNOWN_VARIANTS:
            raise InputError(f"unknown metric variant {self.variant!r}")
        if self.variant == "Snowflake":
            if self.epsilon is None or not (0.0 < self.epsilon <= 1.0):
                raise InputError("Snowflake exponent must lie in (0, 1]")
        if self.variant == "RickmanRug":
            if self.dimension is None or self.dimension <= 2.0:
                raise InputError("RickmanRug dimension must be > 2")
        if self.variant == "ExplicitMatrix":
            if self.matrix is None:
                raise InputError("ExplicitMatrix requires a matrix")
            m = np.asarray(self.matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise InputError("explicit matrix must be square")
            object.__setattr__(self, "matrix", m)

    @classmethod
    def euclidean(cls) -> "MetricSpec":
        return cls("Euclidean")

    @classmethod
    def chordal_sphere(cls) -> "MetricSpec":
        return cls("ChordalSphere")

    @classmethod
    def snowflake(cls, epsilon: float) -> "MetricSpec":
        return cls("Snowflake", epsilon=float(epsilon))

    @classmethod
    def rickman_rug(cls, dimension: float) -> "MetricSpec":
        return cls("RickmanRug", dimension=float(dimension))

    @classmethod
    def explicit(cls, matrix) -> "MetricSpec":
        return cls("ExplicitMatrix", matrix=np.asarray(matrix, dtype=float))

    def pointwise(self, p, q) -> float:
        """Metric value between two raw coordinate vectors (formula variants only)."""
        if self.variant == "ExplicitMatrix":
            raise InputError("pointwise distance undefined for ExplicitMatrix")
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        return float(self._from_offsets((q - p)[None, :])[0])

    def _from_offsets(self, diffs: np.ndarray) -> np.ndarray:
        """Distances for an array of coordinate offsets, shape (m, dim)."""
        if self.variant in ("Euclidean", "ChordalSphere"):
            return np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        if self.variant == "Snowflake":
            e = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
            return e ** self.epsilon
        if self.variant == "RickmanRug":
            # product metric: horizontal Euclidean, vertical snowflaked
            expo = 2.0 / (self.dimension - 1.0)
            return np.sqrt(diffs[:, 0] ** 2 + np.abs(diffs[:, 1]) ** expo)
        raise InputError("offset distances undefined for ExplicitMatrix")

    def euclid_query_radius(self, r: float) -> float:
        """Euclidean radius whose ball contains the metric ball of radius r."""
        if self.variant in ("Euclidean", "ChordalSphere"):
            return r
        if self.variant == "Snowflake":
            return r ** (1.0 / self.epsilon)
        if self.variant == "RickmanRug":
            # d(p,q) <= r forces |dx| <= r and |dy| <= r^(s-1)
            return float(np.hypot(r, r ** (self.dimension - 1.0)))
        raise InputError("query radius undefined for ExplicitMatrix")

    def params_dict(self) -> dict:
        out: dict = {"variant": self.variant}
        if self.variant == "Snowflake":
            out["exponent"] = self.epsilon
        if self.variant == "RickmanRug":
            out["dimension"] = self.dimension
        return out


class BallIndex:
    """Range-query structure: all points within (open) metric radius of a point.

    Formula metrics use a k-d tree on the raw coordinates with a variant
    specific Euclidean superset radius followed by an exact filter; explicit
    matrices use per-row sorted distance lists.
    """

    def __init__(self, space: "DiscreteSpace"):
        self._space = space
        if space.metric.variant == "ExplicitMatrix":
            self._order = np.argsort(space.metric.matrix, axis=1, kind="stable")
            self._sorted = np.take_along_axis(space.metric.matrix, self._order, axis=1)
            self._tree = None
        else:
            self._tree = cKDTree(space.coords)
            self._order = None
            self._sorted = None

    @property
    def tree(self) -> cKDTree | None:
        return self._tree

    def ball_points(self, center: int, r: float) -> np.ndarray:
        """Ids of points p with d(center, p) < r, ascending."""
        sp = self._space
        if r <= 0.0:
            raise InputError("ball radius must be positive")
        if self._tree is None:
            row_sorted = self._sorted[center]
            k = int(np.searchsorted(row_sorted, r, side="left"))
            return np.sort(self._order[center][:k])
        cand = self._tree.query_ball_point(sp.coords[center], self.euclid_radius(r))
        cand = np.asarray(cand, dtype=np.intp)
        d = sp.metric_distances(center, cand)
        return np.sort(cand[d < r])

    def ball_points_many(self, centers: np.ndarray, r: float) -> list[np.ndarray]:
        """Batched open-ball queries at a common radius."""
        sp = self._space
        if self._tree is None:
            return [self.ball_points(int(c), r) for c in centers]
        lists = self._tree.query_ball_point(sp.coords[centers], self.euclid_radius(r))
        out = []
        for c, cand in zip(centers, lists):
            cand = np.asarray(cand, dtype=np.intp)
            d = sp.metric_distances(int(c), cand)
            out.append(np.sort(cand[d < r]))
        return out

    def euclid_radius(self, r: float) -> float:
        return self._space.metric.euclid_query_radius(r)


class DiscreteSpace:
    """Finite metric measure space (X, d, mu) with cached geometry queries."""

    def __init__(self, coords, weights, metric: MetricSpec):
        self.coords = np.asarray(coords, dtype=float)
        if self.coords.ndim == 1:
            self.coords = self.coords.reshape(-1, 1)
        self.weights = np.asarray(weights, dtype=float)
        self.metric = metric
        n = len(self.weights)
        if metric.variant == "ExplicitMatrix":
            if metric.matrix.shape[0] != n:
                raise InputError("matrix size does not match weight count")
            if self.coords.size == 0:
                self.coords = np.zeros((n, 0))
        elif self.coords.shape[0] != n:
            raise InputError("coordinate count does not match weight count")
        if n < 1:
            raise InputError("a space needs at least one point")
        if np.any(self.weights < 0):
            raise InputError("weights must be nonnegative")
        self.total_mass = float(self.weights.sum())
        if self.total_mass <= 0:
            raise InputError("total mass must be positive")
        self.index = BallIndex(self)
        self._diameter: float | None = None
        self._diameter_exact: bool | None = None
        self._mesh: float | None = None
        self._conn: float | None = None
        self._prox_graph: tuple[float, list[np.ndarray]] | None = None

    # -- basic queries --------------------------------------------------

    @property
    def n_points(self) -> int:
        return len(self.weights)

    @property
    def zero_weight_ids(self) -> np.ndarray:
        return np.flatnonzero(self.weights == 0.0)

    def _check_id(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n_points:
            raise InputError(f"point id {i} out of range [0, {self.n_points})")
        return i

    def distances_from(self, i: int) -> np.ndarray:
        """Full distance row d(i, .)."""
        i = self._check_id(i)
        if self.metric.variant == "ExplicitMatrix":
            return self.metric.matrix[i]
        return self.metric._from_offsets(self.coords - self.coords[i])

    def metric_distances(self, i: int, ids: np.ndarray) -> np.ndarray:
        """Distances from point i to a subset of ids."""
        if self.metric.variant == "ExplicitMatrix":
            return self.metric.matrix[i, ids]
        return self.metric._from_offsets(self.coords[ids] - self.coords[i])

    def distance(self, i: int, j: int) -> float:
        i = self._check_id(i)
        j = self._check_id(j)
        if i == j:
            return 0.0
        if self.metric.variant == "ExplicitMatrix":
            return float(self.metric.matrix[i, j])
        return float(self.metric._from_offsets((self.coords[j] - self.coords[i])[None, :])[0])

    def ball_points(self, center: int, r: float) -> np.ndarray:
        return self.index.ball_points(self._check_id(center), r)

    def ball_measure(self, center: int, r: float) -> float:
        """mu(B(center, r)) with the open-ball convention."""
        if r <= 0.0:
            raise InputError("ball radius must be positive")
        ids = self.index.ball_points(self._check_id(center), r)
        return float(self.weights[ids].sum())

    def pair_ball_measure(self, i: int, j: int, scale: float = 1.0) -> float:
        """Measure of B(i, c*d) union B(j, c*d) with d = d(i,j), c = scale."""
        i = self._check_id(i)
        j = self._check_id(j)
        if i == j:
            raise InputError("pair ball undefined for identical endpoints")
        if scale <= 0.0:
            raise InputError("scale must be positive")
        r = scale * self.distance(i, j)
        a = self.index.ball_points(i, r)
        b = self.index.ball_points(j, r)
        return float(self.weights[np.union1d(a, b)].sum())

    # -- cached geometry -------------------------------------------------

    @property
    def diameter(self) -> float:
        if self._diameter is None:
            self._compute_diameter()
        return self._diameter

    @property
    def diameter_exact(self) -> bool:
        if self._diameter_exact is None:
            self._compute_diameter()
        return self._diameter_exact

    def _compute_diameter(self):
        n = self.n_points
        if n == 1:
            self._diameter, self._diameter_exact = 0.0, True
            return
        if n <= _EXACT_DIAMETER_LIMIT:
            best = 0.0
            for i in range(n):
                best = max(best, float(self.distances_from(i).max()))
            self._diameter, self._diameter_exact = best, True
            return
        # 2-sweep farthest point: result >= diam/2 by the triangle inequality
        a = int(self.distances_from(0).argmax())
        row = self.distances_from(a)
        b = int(row.argmax())
        self._diameter = float(max(row[b], self.distances_from(b).max()))
        self._diameter_exact = False

    @property
    def mesh_scale(self) -> float:
        """Max nearest-neighbor distance; the resolution floor of the sample."""
        if self._mesh is None:
            self._mesh = self._compute_mesh()
        return self._mesh

    def _compute_mesh(self) -> float:
        n = self.n_points
        if n == 1:
            return 0.0
        if self.metric.variant == "ExplicitMatrix":
            m = self.metric.matrix.copy()
            np.fill_diagonal(m, np.inf)
            return float(m.min(axis=1).max())
        # metric NN is among Euclidean k-NN for all generator variants
        # (monotone transforms and grid/rug products)
        k = min(n, _NN_CANDIDATES)
        _, idx = self.index.tree.query(self.coords, k=k)
        worst = 0.0
        for i in range(n):
            cand = idx[i][idx[i] != i]
            d = self.metric_distances(i, cand)
            worst = max(worst, float(d.min()))
        return worst

    @property
    def connectivity_scale(self) -> float:
        """Smallest radius (upper bisection bound) with a connected <=r graph."""
        if self._conn is None:
            self._conn = self._compute_connectivity_scale()
        return self._conn

    def _connected_at(self, r: float) -> bool:
        n = self.n_points
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            batch = np.asarray(frontier, dtype=np.intp)
            frontier = []
            lists = self.index.ball_points_many(batch, r * (1 + 1e-12))
            for ids in lists:
                fresh = ids[~seen[ids]]
                seen[fresh] = True
                frontier.extend(int(f) for f in fresh)
        return bool(seen.all())

    def _compute_connectivity_scale(self) -> float:
        if self.n_points == 1:
            return 0.0
        lo = max(self.mesh_scale, 1e-300)
        hi = lo
        while not self._connected_at(hi):
            hi *= 2.0
            if hi > 2.0 * self.diameter:
                return float(hi)  # effectively disconnected
        if hi == lo:
            return float(hi)
        lo = hi / 2.0
        for _ in range(8):
            mid = 0.5 * (lo + hi)
            if self._connected_at(mid):
                hi = mid
            else:
                lo = mid
        return float(hi)

    @property
    def proximity_scale(self) -> float:
        """Radius of the connectivity-certificate graph.

        2x mesh scale, widened to the connectivity scale when the sample's
        natural connectivity is coarser (e.g. anisotropic grids), but never
        past diameter/10 so genuinely disconnected spaces stay disconnected.
        """
        base = 2.0 * self.mesh_scale
        conn = self.connectivity_scale
        if conn <= self.diameter / 10.0:
            return max(base, conn)
        return base

    def proximity_graph(self) -> list[np.ndarray]:
        """Closed-adjacency (d <= proximity_scale) neighbor lists, no self loops."""
        scale = self.proximity_scale
        if self._prox_graph is not None and self._prox_graph[0] == scale:
            return self._prox_graph[1]
        n = self.n_points
        adj: list[np.ndarray] = []
        batch = np.arange(n)
        lists = self.index.ball_points_many(batch, scale * (1 + 1e-9))
        for i, ids in enumerate(lists):
            d = self.metric_distances(i, ids)
            keep = ids[(d <= scale * (1 + 1e-12)) & (ids != i)]
            adj.append(keep)
        self._prox_graph = (scale, adj)
        return adj

    # -- validation -------------------------------------------------------

    def validate_metric_axioms(self, n_triples: int = 10_000, seed: int = 0,
                               rel_tol: float = 1e-9) -> None:
        """Sampled symmetry/triangle checks; raises ValidationError on failure."""
        n = self.n_points
        if n < 3:
            return
        rng = np.random.default_rng(seed)
        scale = max(self.diameter, 1e-300)
        for _ in range(n_triples // 1024 + 1):
            m = min(1024, n_triples)
            i = rng.integers(0, n, size=m)
            j = rng.integers(0, n, size=m)
            k = rng.integers(0, n, size=m)
            dij = np.array([self.distance(a, b) for a, b in zip(i, j)])
            dik = np.array([self.distance(a, b) for a, b in zip(i, k)])
            dkj = np.array([self.distance(a, b) for a, b in zip(k, j)])
            bad = dij > dik + dkj + rel_tol * scale
            if bad.any():
                t = int(np.flatnonzero(bad)[0])
                raise ValidationError(
                    f"triangle inequality fails on triple ({i[t]}, {k[t]}, {j[t]}): "
                    f"d={dij[t]:.6g} > {dik[t]:.6g} + {dkj[t]:.6g}")

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        out = {
            "metric": self.metric.params_dict(),
            "points": [list(map(float, row)) for row in self.coords],
            "weights": [float(w) for w in self.weights],
        }
        if self.metric.variant == "ExplicitMatrix":
            m = self.metric.matrix
            tri = [float(m[i, j]) for i in range(1, self.n_points) for j in range(i)]
            out["matrix"] = tri
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DiscreteSpace":
        try:
            metric_doc = dict(doc["metric"])
            weights = doc["weights"]
            points = doc.get("points", [])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed space document: {exc}") from exc
        variant = metric_doc.get("variant")
        if variant not in KNOWN_VARIANTS:
            raise InputError(f"unknown metric variant {variant!r}")
        n = len(weights)
        if variant == "ExplicitMatrix":
            tri = doc.get("matrix")
            if tri is None or len(tri) != n * (n - 1) // 2:
                raise InputError("explicit space needs a strict lower-triangle matrix")
            m = np.zeros((n, n))
            pos = 0
            for i in range(1, n):
                m[i, :i] = tri[pos:pos + i]
                pos += i
            m = m + m.T
            spec = MetricSpec.explicit(m)
            coords = np.asarray(points, dtype=float) if points else np.zeros((n, 0))
            return cls(coords, weights, spec)
        if variant == "Snowflake":
            spec = MetricSpec.snowflake(metric_doc["exponent"])
        elif variant == "RickmanRug":
            spec = MetricSpec.rickman_rug(metric_doc["dimension"])
        else:
            spec = MetricSpec(variant)
        return cls(points, weights, spec)

    @classmethod
    def load(cls, path) -> "DiscreteSpace":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read space file {path}: {exc}") from exc
        return cls.from_json_dict(doc)


def union_measure(space: DiscreteSpace, ids_a: np.ndarray, ids_b: np.ndarray) -> float:
    """Weight of the union of two id sets (each point counted once)."""
    return float(space.weights[np.union1d(ids_a, ids_b)].sum())
