"""Approximate k-NN via a hierarchical navigable small-world graph.

The index is a layered proximity graph: every point lives at level 0, and a
geometrically-distributed fraction is promoted to higher levels that act as
long-range entry routes. Queries greedily descend the layers and finish with
a beam search at level 0. Construction keeps adjacency symmetric at every
level (pruning removes the reverse edge too) with max degree M above level 0
and 2M at level 0. Distances are squared Euclidean internally; square roots
are taken only at the API boundary. `exact_knn` is the brute-force oracle.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class NeighborList:
    ids: np.ndarray         # (k,) int64
    distances: np.ndarray   # (k,) float64, ascending
    truncated: bool = False


@dataclass
class AnnIndex:
    points: np.ndarray                      # (n, d)
    M: int
    ef_construction: int
    seed: int
    adjacency: list = field(default_factory=list)  # adjacency[node][level] -> [ids]
    entry_point: int = -1
    max_level: int = -1
    _sq_norms: np.ndarray | None = None

    def __len__(self) -> int:
        return self.points.shape[0]

    def level_of(self, node: int) -> int:
        return len(self.adjacency[node]) - 1

    def neighbors(self, node: int, level: int) -> list:
        return self.adjacency[node][level]


def exact_knn(points, query, k: int) -> NeighborList:
    """Exact Euclidean k-NN by full scan; ties broken by lower id."""
    points = np.asarray(points, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64).ravel()
    if points.ndim != 2 or points.shape[1] != query.shape[0]:
        raise ParameterError(
            f"points {points.shape} incompatible with query of dim {query.shape[0]}"
        )
    if k < 1 or k > points.shape[0]:
        raise ParameterError(f"k={k} outside [1, {points.shape[0]}]")
    diffs = points - query
    sq = np.einsum("ij,ij->i", diffs, diffs)
    order = np.argsort(sq, kind="stable")[:k]
    return NeighborList(order.astype(np.int64), np.sqrt(sq[order]))


def _sq_dists(index: AnnIndex, query, query_sq, ids) -> np.ndarray:
    pts = index.points[ids]
    d = query_sq + index._sq_norms[ids] - 2.0 * (pts @ query)
    return np.maximum(d, 0.0)


def _search_layer(index, query, query_sq, entries, level, ef):
    """Beam search at one level. `entries` and the result are (dist, id)
    tuples; the result is ascending and at most ef long."""
    visited = {node for _, node in entries}
    candidates = list(entries)
    heapq.heapify(candidates)
    best = [(-d, node) for d, node in entries]
    heapq.heapify(best)
    while len(best) > ef:
        heapq.heappop(best)

    while candidates:
        dist, node = heapq.heappop(candidates)
        if len(best) >= ef and dist > -best[0][0]:
            break
        fresh = [nb for nb in index.adjacency[node][level] if nb not in visited]
        if not fresh:
            continue
        visited.update(fresh)
        dists = _sq_dists(index, query, query_sq, fresh)
        for nb, d in zip(fresh, dists):
            if len(best) < ef:
                heapq.heappush(candidates, (d, nb))
                heapq.heappush(best, (-d, nb))
            elif d < -best[0][0]:
                heapq.heappush(candidates, (d, nb))
                heapq.heappushpop(best, (-d, nb))
    return sorted((-d, node) for d, node in best)


def _select_diverse(index, candidates, m):
    """Neighbor selection preferring diverse directions: keep a candidate only
    if it is closer to the query than to every already-kept neighbor. Pruned
    candidates are dropped (no keep-pruned-connections backfill)."""
    if len(candidates) <= m:
        return [node for _, node in candidates]
    kept = []
    for dist, node in candidates:
        if len(kept) >= m:
            break
        if not kept:
            kept.append(node)
            continue
        vec = index.points[node]
        to_kept = _sq_dists(index, vec, float(vec @ vec), kept)
        if dist < to_kept.min():
            kept.append(node)
    return kept


def _prune_symmetric(index, node, level, cap):
    """Shrink a node's neighbor list with the diversity heuristic, removing
    reverse edges of dropped neighbors so adjacency stays symmetric."""
    current = index.adjacency[node][level]
    if len(current) <= cap:
        return
    vec = index.points[node]
    dists = _sq_dists(index, vec, float(vec @ vec), current)
    ranked = sorted(zip(dists, current))
    kept = _select_diverse(index, ranked, cap)
    dropped = set(current) - set(kept)
    index.adjacency[node][level] = kept
    for other in dropped:
        peers = index.adjacency[other][level]
        if node in peers:
            peers.remove(node)


def build_index(points, M: int = 16, ef_construction: int = 200,
                seed: int = 0) -> AnnIndex:
    """Insert all points in order with greedy layered construction;
    deterministic for a fixed seed."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ParameterError(f"points must be (n, d), got {points.shape}")
    if M < 2:
        raise ParameterError(f"M must be >= 2, got {M}")
    if ef_construction < 1:
        raise ParameterError(f"ef_construction must be >= 1, got {ef_construction}")

    index = AnnIndex(points=points, M=M, ef_construction=ef_construction,
                     seed=seed)
    index._sq_norms = np.einsum("ij,ij->i", points, points)
    rng = np.random.default_rng(seed)
    inv_log_m = 1.0 / math.log(M)

    for node in range(points.shape[0]):
        level = int(-math.log(rng.uniform()) * inv_log_m)
        index.adjacency.append([[] for _ in range(level + 1)])
        if index.entry_point < 0:
            index.entry_point = node
            index.max_level = level
            continue

        query = points[node]
        query_sq = float(index._sq_norms[node])
        dist0 = _sq_dists(index, query, query_sq, [index.entry_point])[0]
        entries = [(dist0, index.entry_point)]
        for lvl in range(index.max_level, level, -1):
            entries = _search_layer(index, query, query_sq, entries, lvl, 1)

        for lvl in range(min(level, index.max_level), -1, -1):
            candidates = _search_layer(index, query, query_sq, entries, lvl,
                                       ef_construction)
            cap = 2 * M if lvl == 0 else M
            selected = _select_diverse(index, candidates, M)
            for nb in selected:
                index.adjacency[node][lvl].append(nb)
                index.adjacency[nb][lvl].append(node)
                _prune_symmetric(index, nb, lvl, cap)
            entries = candidates

        if level > index.max_level:
            index.max_level = level
            index.entry_point = node
    return index


def knn_query(index: AnnIndex, query, k: int, ef_search: int = 64) -> NeighborList:
    """Approximate k nearest neighbors of `query`, ascending by distance.

    Asking for k >= index size degrades to the exact full scan and flags the
    result as truncated when k exceeds the index size.
    """
    n = len(index)
    query = np.asarray(query, dtype=np.float64).ravel()
    if query.shape[0] != index.points.shape[1]:
        raise ParameterError(
            f"query dim {query.shape[0]} != index dim {index.points.shape[1]}"
        )
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if ef_search < k:
        raise ParameterError(f"ef_search {ef_search} < k {k}")
    if k >= n:
        exact = exact_knn(index.points, query, n)
        return NeighborList(exact.ids, exact.distances, truncated=k > n)

    query_sq = float(query @ query)
    dist0 = _sq_dists(index, query, query_sq, [index.entry_point])[0]
    entries = [(dist0, index.entry_point)]
    for lvl in range(index.max_level, 0, -1):
        entries = _search_layer(index, query, query_sq, entries, lvl, 1)
    found = _search_layer(index, query, query_sq, entries, 0, ef_search)[:k]
    ids = np.array([node for _, node in found], dtype=np.int64)
    dists = np.sqrt(np.array([d for d, _ in found], dtype=np.float64))
    return NeighborList(ids, dists, truncated=len(found) < k)


def knn_query_batch(index: AnnIndex, queries, k: int,
                    ef_search: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Vector-stack convenience wrapper: (n_queries, k) ids and distances."""
    queries = np.asarray(queries, dtype=np.float64)
    ids = np.empty((queries.shape[0], min(k, len(index))), dtype=np.int64)
    dists = np.empty_like(ids, dtype=np.float64)
    for i, q in enumerate(queries):
        result = knn_query(index, q, k, ef_search)
        ids[i] = result.ids
        dists[i] = result.distances
    return ids, dists
