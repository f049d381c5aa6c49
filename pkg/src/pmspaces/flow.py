"""Max-flow / min-cut by Dinic's blocking-flow algorithm.

Capacities may be floats or Fractions; the algorithm only adds, subtracts
and compares them, so exact inputs give an exact cut.  In float mode a
residual capacity counts as positive only above ``eps``.

Among all minimum cuts, the source sides form a lattice.  The smallest one
is the set of nodes reachable from the source in the final residual graph;
the largest is the complement of the nodes that can still reach the sink.
"""
from __future__ import annotations

from collections import deque

import numpy as np


class FlowNetwork:
    """Directed network on nodes ``0 .. n-1`` with distinguished source/sink.

    Parameters
    ----------
    n : int
        Node count, including source and sink.
    source, sink : int
    eps : float
        Residual capacities ``<= eps`` are treated as saturated.  Use 0 for
        exact arithmetic.
    """

    def __init__(self, n: int, source: int, sink: int, eps: float = 0.0):
        if source == sink:
            raise ValueError("source and sink must differ")
        self.n = n
        self.source = source
        self.sink = sink
        self.eps = eps
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list = []
        self._flow_value = None

    def add_arc(self, u: int, v: int, cap, rev_cap=0):
        """Arc ``u -> v``; ``rev_cap`` adds the opposite arc on the same pair."""
        if cap < 0 or rev_cap < 0:
            raise ValueError("capacities must be non-negative")
        if not (np.isfinite(float(cap)) and np.isfinite(float(rev_cap))):
            raise ValueError("capacities must be finite")
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(rev_cap)
        self._flow_value = None

    @property
    def num_arcs(self) -> int:
        return len(self.to)

    def _bfs(self, level):
        for i in range(self.n):
            level[i] = -1
        level[self.source] = 0
        q = deque([self.source])
        to, cap, eps = self.to, self.cap, self.eps
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                v = to[e]
                if level[v] < 0 and cap[e] > eps:
                    level[v] = level[u] + 1
                    q.append(v)
        return level[self.sink] >= 0

    def max_flow(self):
        """Run Dinic to completion and return the flow value."""
        if self._flow_value is not None:
            return self._flow_value
        s, t = self.source, self.sink
        to, cap, eps, adj = self.to, self.cap, self.eps, self.adj
        total = 0 * (cap[0] if cap else 0)
        level = [-1] * self.n
        while self._bfs(level):
            it = [0] * self.n
            while True:
                stack: list[int] = []
                u = s
                while u != t:
                    edges = adj[u]
                    i = it[u]
                    while i < len(edges):
                        e = edges[i]
                        v = to[e]
                        if cap[e] > eps and level[v] == level[u] + 1:
                            break
                        i += 1
                    it[u] = i
                    if i < len(edges):
                        e = edges[i]
                        stack.append(e)
                        u = to[e]
                        continue
                    if u == s:
                        break
                    level[u] = -1
                    e = stack.pop()
                    u = to[e ^ 1]
                    it[u] += 1
                if u != t:
                    break
                f = min(cap[e] for e in stack)
                for e in stack:
                    cap[e] -= f
                    cap[e ^ 1] += f
                total += f
        self._flow_value = total
        return total

    def source_side(self) -> np.ndarray:
        """Smallest min-cut source side: residual reachability from the source."""
        self.max_flow()
        seen = np.zeros(self.n, dtype=bool)
        seen[self.source] = True
        q = deque([self.source])
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                v = self.to[e]
                if not seen[v] and self.cap[e] > self.eps:
                    seen[v] = True
                    q.append(v)
        return seen

    def sink_side(self) -> np.ndarray:
        """Nodes that can still reach the sink in the residual graph."""
        self.max_flow()
        seen = np.zeros(self.n, dtype=bool)
        seen[self.sink] = True
        q = deque([self.sink])
        while q:
            v = q.popleft()
            for e in self.adj[v]:
                u = self.to[e]
                # residual arc u -> v is the partner of v -> u
                if not seen[u] and self.cap[e ^ 1] > self.eps:
                    seen[u] = True
                    q.append(u)
        return seen


def min_cut(net: FlowNetwork, maximal: bool = False):
    """Minimum cut value and a source-side mask over all nodes.

    ``maximal=False`` returns the smallest optimal source side, ``True`` the
    largest one.
    """
    value = net.max_flow()
    if maximal:
        return value, ~net.sink_side()
    return value, net.source_side()


__all__ = ["FlowNetwork", "min_cut"]
