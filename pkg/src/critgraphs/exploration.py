"""Graph container, the two-active-vertex exploration process, and a BFS oracle.

Vertices are 0-based everywhere inside the library. Text I/O (edge lists, CLI
traces) is 1-based; the conversion happens only at those boundaries.
"""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on ``range(n)`` in CSR form.

    ``indices[indptr[v]:indptr[v + 1]]`` are the neighbours of ``v`` in
    increasing order. Instances are treated as immutable and may be shared
    between threads.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @classmethod
    def from_edges(cls, n: int, u, v, *, coalesce: bool = True) -> "Graph":
        """Build a graph from endpoint arrays.

        Multiple copies of an edge are merged when ``coalesce`` is true (the
        default); otherwise the caller guarantees the edges are distinct.
        Self-loops and out-of-range endpoints raise ``ValueError``.
        """
        if n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={n}")
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.shape != v.shape:
            raise ValueError("endpoint arrays differ in length")
        if u.size == 0:
            return cls.empty(n)
        if u.min() < 0 or v.min() < 0 or u.max() >= n or v.max() >= n:
            raise ValueError("edge endpoint outside [0, n)")
        if np.any(u == v):
            raise ValueError("self-loops are not allowed")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        if coalesce:
            key = np.unique(lo * n + hi)
            lo, hi = key // n, key % n
        rows = np.concatenate((lo, hi))
        cols = np.concatenate((hi, lo))
        order = np.argsort(rows * n + cols)
        indices = cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n, indptr, indices)

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Sequence[int]]) -> "Graph":
        n = len(adjacency)
        u = [a for a, nbrs in enumerate(adjacency) for b in nbrs]
        v = [b for nbrs in adjacency for b in nbrs]
        g = cls.from_edges(n, u, v)
        g.check()
        if int(g.indptr[-1]) != len(u):
            raise ValueError("adjacency lists are not symmetric or contain duplicates")
        return g

    @property
    def num_edges(self) -> int:
        return int(self.indptr[-1]) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency(self) -> list[list[int]]:
        ptr = self.indptr.tolist()
        idx = self.indices.tolist()
        return [idx[ptr[v] : ptr[v + 1]] for v in range(self.n)]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints ``(u, v)`` with ``u < v``, sorted lexicographically."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        keep = rows < self.indices
        return rows[keep], self.indices[keep]

    def csgraph(self) -> csr_matrix:
        data = np.ones(self.indices.size, dtype=np.int8)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def check(self) -> None:
        """Raise ``ValueError`` unless the CSR arrays describe a simple graph."""
        ptr, idx, n = self.indptr, self.indices, self.n
        if ptr.shape != (n + 1,) or ptr[0] != 0 or np.any(np.diff(ptr) < 0):
            raise ValueError("malformed indptr")
        if idx.size != ptr[-1]:
            raise ValueError("indptr and indices disagree on edge count")
        if idx.size == 0:
            return
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError("neighbour index outside [0, n)")
        rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(ptr))
        if np.any(rows == idx):
            raise ValueError("self-loop present")
        key = rows * n + idx
        if np.any(np.diff(key) <= 0):
            raise ValueError("neighbour lists not strictly increasing")
        if not np.array_equal(np.sort(idx * n + rows), key):
            raise ValueError("adjacency is not symmetric")


@dataclass
class ExplorationTrace:
    """Record of one run of the exploration process.

    ``eta[t - 1]`` is the number of unseen vertices activated at step ``t`` and
    ``active[t]`` is ``Y_t``; ``active[0]`` is ``Y_0``, which is 2 unless the
    start is isolated. An isolated start ends the run at once with both lists
    empty, except in sweep mode where ``active`` starts at 0. ``component_sizes`` lists
    completed components in discovery order, the first one being the component
    of ``start``. ``sweep`` marks runs continued past the first component, and
    ``truncated`` marks runs stopped by ``max_steps`` with a component still open.
    """

    start: int
    eta: list[int] = field(default_factory=list)
    active: list[int] = field(default_factory=list)
    component_sizes: list[int] = field(default_factory=list)
    halted_isolated: bool = False
    sweep: bool = False
    truncated: bool = False

    @property
    def steps(self) -> int:
        return len(self.eta)

    @property
    def start_component_size(self) -> int | None:
        """Size of the component of ``start``; ``None`` if the run was cut short."""
        return self.component_sizes[0] if self.component_sizes else None

    def start_component_exceeds(self, k: int) -> bool:
        """Whether ``|C(start)| > k``, decidable from a run of at least ``k`` steps."""
        if self.component_sizes:
            return self.component_sizes[0] > k
        # still open: t explored vertices plus Y_t active ones belong to C(start)
        return self.steps + self.active[-1] > k

    def to_dict(self) -> dict:
        return {
            "start": self.start + 1,
            "eta": self.eta,
            "active": self.active,
            "component_sizes": self.component_sizes,
            "halted_isolated": self.halted_isolated,
            "sweep": self.sweep,
            "truncated": self.truncated,
        }


def explore(
    graph: Graph, start: int, max_steps: int | None = None, *, sweep: bool = False
) -> ExplorationTrace:
    """Run the exploration process from ``start``.

    The start vertex and its smallest-labelled neighbour are activated
    (``Y_0 = 2``); each step explores the smallest active vertex and activates
    its unseen neighbours. When no vertex is active the component of ``start``
    is complete. With ``sweep=True`` the process restarts at the smallest unseen
    vertex (activating it with its smallest neighbour) until every vertex is
    explored; isolated restart vertices are recorded as singleton components
    with ``eta = Y = 0`` instead of halting the run.

    Parameters
    ----------
    graph : Graph
    start : int
        0-based start vertex.
    max_steps : int, optional
        Stop after this many steps; the trace is marked ``truncated`` when a
        component is still open at that point.
    sweep : bool
        Continue past the first component.
    """
    n = graph.n
    if not 0 <= start < n:
        raise IndexError(f"start vertex {start} outside [0, {n})")
    if max_steps is not None and max_steps < 1:
        raise ValueError("max_steps must be positive")
    ptr = graph.indptr
    idx = graph.indices
    trace = ExplorationTrace(start=start, sweep=sweep)
    sizes = trace.component_sizes
    eta_out = trace.eta
    active_out = trace.active

    UNSEEN, ACTIVE, EXPLORED = 0, 1, 2
    status = bytearray(n)
    heap: list[int] = []
    if ptr[start] == ptr[start + 1]:
        trace.halted_isolated = True
        sizes.append(1)
        if not sweep:
            return trace
        status[start] = EXPLORED
        done = 1
        y = 0
        active_out.append(0)
    else:
        first = int(idx[ptr[start]])
        status[start] = status[first] = ACTIVE
        heap = [min(start, first), max(start, first)]
        done = 0
        y = 2
        active_out.append(2)

    limit = n - done if max_steps is None else min(n - done, max_steps)
    next_unseen = 0
    component = 0
    for _ in range(limit):
        if y > 0:
            u = heapq.heappop(heap)
            eta = 0
        else:
            if component:
                sizes.append(component)
                component = 0
            if not sweep:
                break
            while status[next_unseen] != UNSEEN:
                next_unseen += 1
            u = next_unseen
            lo, hi = ptr[u], ptr[u + 1]
            if lo == hi:
                status[u] = EXPLORED
                eta_out.append(0)
                active_out.append(0)
                component = 1
                continue
            # all neighbours of a restart vertex are unseen; the smallest is
            # declared active together with u before step (a) resumes
            v = int(idx[lo])
            status[v] = ACTIVE
            heapq.heappush(heap, v)
            eta = 1
            y = 1
        for w in idx[ptr[u] : ptr[u + 1]].tolist():
            if status[w] == UNSEEN:
                status[w] = ACTIVE
                heapq.heappush(heap, w)
                eta += 1
        status[u] = EXPLORED
        component += 1
        y += eta - 1
        eta_out.append(eta)
        active_out.append(y)
    else:
        if y == 0 and component:
            sizes.append(component)
        trace.truncated = y > 0 or (sweep and sum(sizes) < n)
    return trace


def component_sizes_bfs(graph: Graph) -> list[int]:
    """Sizes of all connected components by plain breadth-first search.

    Returned in decreasing order; they sum to ``graph.n``.
    """
    adj = graph.adjacency()
    seen = [False] * graph.n
    sizes = []
    for root in range(graph.n):
        if seen[root]:
            continue
        seen[root] = True
        queue = deque([root])
        size = 0
        while queue:
            u = queue.popleft()
            size += 1
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        sizes.append(size)
    sizes.sort(reverse=True)
    return sizes


def component_sizes(graph: Graph) -> np.ndarray:
    """Component sizes in decreasing order via scipy's compiled traversal."""
    if graph.num_edges == 0:
        return np.ones(graph.n, dtype=np.int64)
    # strong components of a symmetric digraph are the undirected components
    _, labels = connected_components(graph.csgraph(), directed=True, connection="strong")
    return np.sort(np.bincount(labels))[::-1]


# below this size the pure-Python search beats scipy's call overhead
SMALL_GRAPH = 64


def largest_component_size(graph: Graph) -> int:
    if graph.n <= SMALL_GRAPH:
        return component_sizes_bfs(graph)[0]
    return int(component_sizes(graph)[0])
