"""Undirected weighted graphs: incidence matrix, Laplacian, connectivity.

Nodes are numbered 1..n. All matrices are dense; the networks of interest
are desk-scale (N well below 100).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedGraphError, InputError

# Eigenvalues below this fraction of the largest one count as zero.
ZERO_EIG_RTOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Simple connected undirected graph with positive edge weights.

    edges: tuple of (j, k, weight) with 1-based node indices, j != k.
    """

    n_nodes: int
    edges: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise InputError("graph needs at least one node")
        seen = set()
        norm_edges = []
        for j, k, w in self.edges:
            if not (1 <= j <= self.n_nodes and 1 <= k <= self.n_nodes):
                raise InputError(f"edge ({j},{k}) references unknown node")
            if j == k:
                raise InputError(f"self-loop at node {j}")
            if w <= 0:
                raise InputError(f"edge ({j},{k}) has non-positive weight {w}")
            key = (min(j, k), max(j, k))
            if key in seen:
                raise InputError(f"duplicate edge ({j},{k})")
            seen.add(key)
            norm_edges.append((j, k, float(w)))
        object.__setattr__(self, "edges", tuple(norm_edges))
        if not self._connected():
            raise DisconnectedGraphError("graph is not connected")

    def _connected(self) -> bool:
        if self.n_nodes == 1:
            return True
        adj = {i: [] for i in range(1, self.n_nodes + 1)}
        for j, k, _ in self.edges:
            adj[j].append(k)
            adj[k].append(j)
        seen = {1}
        stack = [1]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.n_nodes

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges])

    def neighbors(self, k: int):
        """Yield (neighbor, weight) pairs of node k."""
        for a, b, w in self.edges:
            if a == k:
                yield b, w
            elif b == k:
                yield a, w


def build_incidence(graph: Graph) -> np.ndarray:
    """Oriented incidence matrix; the smaller node index is the sink (+1)."""
    B = np.zeros((graph.n_nodes, graph.n_edges))
    for col, (j, k, _) in enumerate(graph.edges):
        sink, source = min(j, k), max(j, k)
        B[sink - 1, col] = 1.0
        B[source - 1, col] = -1.0
    return B


def build_laplacian(graph: Graph) -> np.ndarray:
    """Weighted graph Laplacian B diag(w) B^T."""
    B = build_incidence(graph)
    return B @ np.diag(graph.weights()) @ B.T


def lambda2(L: np.ndarray) -> float:
    """Algebraic connectivity: second-smallest Laplacian eigenvalue.

    Raises DisconnectedGraphError if more than one eigenvalue is
    numerically zero.
    """
    eigs = np.linalg.eigvalsh(L)
    cutoff = ZERO_EIG_RTOL * max(eigs[-1], 0.0)
    eigs = np.where(np.abs(eigs) <= cutoff, 0.0, eigs)
    if np.count_nonzero(eigs == 0.0) > 1:
        raise DisconnectedGraphError("Laplacian has a repeated zero eigenvalue: disconnected graph")
    return float(eigs[1])


def extend(L: np.ndarray) -> np.ndarray:
    """Duplicate each Laplacian entry onto both planar coordinates (kron with I2)."""
    return np.kron(L, np.eye(2))
