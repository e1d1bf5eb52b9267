"""Chain metric over delta-proximity graphs.

The delta graph connects points at distance in (min_step, delta]; each edge
carries weight mu(B_uv)^(1/s), the pair-ball measure at the step length.
chain_distance is an exact nonnegative-edge shortest path, so monotonicity
in delta and the triangle inequality hold without tolerance: the computed
value is the float minimum over paths of left-associated edge sums.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .errors import InputError
from .space import DiscreteSpace

INF = math.inf


def worker_count() -> int:
    """Worker cap from QSLAB_THREADS (default: available parallelism)."""
    raw = os.environ.get("QSLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise InputError(f"QSLAB_THREADS must be an integer, got {raw!r}")
    return os.cpu_count() or 1


@dataclass
class DeltaGraph:
    """Undirected proximity graph at scale delta with measure-power weights."""

    delta: float
    s: float
    min_step: float
    n: int
    neighbors: list[np.ndarray]
    weights: list[np.ndarray]
    below_mesh: bool
    matrix: csr_matrix = field(repr=False)

    def degree(self, u: int) -> int:
        return len(self.neighbors[u])


def build_delta_graph(space: DiscreteSpace, delta: float, s: float,
                      min_step: float = 0.0, max_degree: int | None = None) -> DeltaGraph:
    """Build the (min_step, delta] step graph with weights mu(B_uv)^(1/s).

    Pair-ball measures are computed once per unordered pair.  Because every
    edge has step length <= delta, the union ball B_uv is read off the
    per-node delta-candidate lists without further index queries.
    max_degree keeps, per node, only the shortest candidate steps before
    symmetrizing; the probe modules use it to bound dense band graphs.
    """
    if delta <= 0:
        raise InputError("delta must be positive")
    if s <= 0:
        raise InputError("dimension parameter s must be positive")
    if min_step >= delta:
        raise InputError("min_step must be below delta")
    n = space.n_points
    idx = space.index
    pairs: dict[tuple[int, int], float] = {}
    all_ids = np.arange(n)
    cand_ids = idx.ball_points_many(all_ids, delta * (1 + 1e-12))
    cand_dist = [space.metric_distances(u, cand_ids[u]) for u in range(n)]
    for u in range(n):
        cand, d = cand_ids[u], cand_dist[u]
        keep = (d <= delta) & (d > min_step) & (cand != u)
        cand, d = cand[keep], d[keep]
        if max_degree is not None and len(cand) > max_degree:
            sel = np.argsort(d, kind="stable")[:max_degree]
            cand, d = cand[sel], d[sel]
        for v, dv in zip(cand, d):
            key = (u, int(v)) if u < v else (int(v), u)
            if key not in pairs:
                pairs[key] = float(dv)

    w = space.weights
    weight_of: dict[tuple[int, int], float] = {}
    for (u, v), r in pairs.items():
        a = cand_ids[u][cand_dist[u] < r]
        b = cand_ids[v][cand_dist[v] < r]
        mu = float(w[np.union1d(a, b)].sum())
        weight_of[(u, v)] = mu ** (1.0 / s)

    adjacency: list[dict[int, float]] = [dict() for _ in range(n)]
    for (u, v), _ in pairs.items():
        wt = weight_of[(u, v)]
        adjacency[u][v] = wt
        adjacency[v][u] = wt
    neighbors = []
    weights = []
    rows, cols, data = [], [], []
    for u in range(n):
        ids = np.fromiter(sorted(adjacency[u]), dtype=np.intp, count=len(adjacency[u]))
        neighbors.append(ids)
        wt = np.array([adjacency[u][int(v)] for v in ids])
        weights.append(wt)
        rows.extend([u] * len(ids))
        cols.extend(int(v) for v in ids)
        data.extend(float(x) for x in wt)
    matrix = csr_matrix((data, (rows, cols)), shape=(n, n))
    return DeltaGraph(delta=float(delta), s=float(s), min_step=float(min_step), n=n,
                      neighbors=neighbors, weights=weights,
                      below_mesh=bool(delta < space.mesh_scale), matrix=matrix)


@dataclass
class ChainResult:
    """Optimal delta-chain between two points."""

    path: list[int]
    total_weight: float
    delta: float
    s: float
    reachable: bool


def _distances_from(graph: DeltaGraph, source: int) -> np.ndarray:
    return _dijkstra(graph.matrix, directed=True, indices=source)


def chain_distances_from(graph: DeltaGraph, sources: np.ndarray) -> np.ndarray:
    """Batch shortest-path weights from each source to all nodes."""
    sources = np.asarray(sources, dtype=np.intp)
    if len(sources) == 0:
        return np.zeros((0, graph.n))
    return np.atleast_2d(_dijkstra(graph.matrix, directed=True, indices=sources))


def chain_distance(graph: DeltaGraph, x: int, y: int) -> ChainResult:
    """Exact minimum-weight chain from x to y in the delta graph.

    Dijkstra always runs from the lower-id endpoint, which makes the value
    bitwise symmetric in (x, y).  Among float-tied optimal paths the
    reported chain is the lexicographically smallest node sequence read
    from the higher-id endpoint (deterministic tie-break).
    """
    if not 0 <= x < graph.n or not 0 <= y < graph.n:
        raise InputError("chain endpoints out of range")
    if x == y:
        return ChainResult([x], 0.0, graph.delta, graph.s, True)
    src, dst = (x, y) if x < y else (y, x)
    dist = _distances_from(graph, src)
    if not np.isfinite(dist[dst]):
        return ChainResult([], INF, graph.delta, graph.s, False)
    # backward walk dst -> src along bitwise-tight edges
    path = [dst]
    seen = {dst}
    u = dst
    while u != src:
        du = dist[u]
        nxt = -1
        for v, w in zip(graph.neighbors[u], graph.weights[u]):
            v = int(v)
            if v in seen:
                continue
            if dist[v] + w == du:
                nxt = v
                break  # neighbors sorted ascending: first hit is min id
        if nxt < 0:
            # zero-weight-cycle corner: fall back to any tight unseen edge
            cand = [int(v) for v, w in zip(graph.neighbors[u], graph.weights[u])
                    if int(v) not in seen and dist[int(v)] + w <= du]
            if not cand:
                raise InputError("path reconstruction failed (inconsistent graph)")
            nxt = min(cand)
        path.append(nxt)
        seen.add(nxt)
        u = nxt
    path.reverse()  # now src -> dst
    if x != src:
        path.reverse()
    return ChainResult(path, float(dist[dst]), graph.delta, graph.s, True)


@dataclass
class ChainProfile:
    """Chain weights across a decreasing delta schedule.

    q_estimate is the max over the two smallest deltas, a finite surrogate
    for the vanishing-step limsup.
    """

    x: int
    y: int
    s: float
    entries: list[tuple[float, float]]
    reachable: list[bool]
    truncated: bool
    q_estimate: float


def chain_profile(space: DiscreteSpace, x: int, y: int,
                  deltas, s: float) -> ChainProfile:
    """One chain_distance per schedule entry; truncates at the first unreachable delta."""
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise InputError("empty delta schedule")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise InputError("delta schedule must be strictly decreasing")
    if deltas[-1] < space.mesh_scale:
        raise InputError(
            f"schedule entry {deltas[-1]:.6g} is below the mesh scale "
            f"{space.mesh_scale:.6g}")
    entries: list[tuple[float, float]] = []
    reachable: list[bool] = []
    truncated = False
    for d in deltas:
        graph = build_delta_graph(space, d, s)
        res = chain_distance(graph, x, y)
        if not res.reachable:
            truncated = True
            break
        entries.append((d, res.total_weight))
        reachable.append(True)
    if entries:
        tail = [w for _, w in entries[-2:]]
        q_est = max(tail)
    else:
        q_est = INF
    return ChainProfile(x=x, y=y, s=float(s), entries=entries, reachable=reachable,
                        truncated=truncated, q_estimate=q_est)
