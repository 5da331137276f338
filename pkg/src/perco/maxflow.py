"""Small-graph max flow with exact rational capacities.

Edmonds-Karp on adjacency lists.  Capacities may be Fractions or floats;
arithmetic stays exact when every capacity is a Fraction.  Callers model
"unbounded" edges by passing any capacity at least the total source
capacity, which keeps flow recovery exact.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Dict, Hashable, List


class FlowNetwork:
    def __init__(self):
        self.adj: Dict[Hashable, List[int]] = {}
        self.edges: List[list] = []  # [src, dst, remaining capacity]
        self._caps0: List = []

    def add_node(self, v):
        self.adj.setdefault(v, [])

    def add_edge(self, u, v, cap):
        self.add_node(u)
        self.add_node(v)
        self.adj[u].append(len(self.edges))
        self.edges.append([u, v, cap])
        self.adj[v].append(len(self.edges))
        self.edges.append([v, u, cap * 0])

    def _augmenting_path(self, s, t):
        parent = {s: None}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if u == t:
                break
            for ei in self.adj[u]:
                _, v, cap = self.edges[ei]
                if cap > 0 and v not in parent:
                    parent[v] = ei
                    queue.append(v)
        if t not in parent:
            return None
        path = []
        v = t
        while parent[v] is not None:
            ei = parent[v]
            path.append(ei)
            v = self.edges[ei][0]
        return path[::-1]

    def max_flow(self, s, t):
        """Total s-t flow value; per-edge flows are recoverable afterwards
        via flow_on."""
        self._caps0 = [e[2] for e in self.edges]
        total = None
        while True:
            path = self._augmenting_path(s, t)
            if path is None:
                break
            bottleneck = min(self.edges[ei][2] for ei in path)
            if bottleneck <= 0:
                break
            for ei in path:
                self.edges[ei][2] -= bottleneck
                self.edges[ei ^ 1][2] += bottleneck
            total = bottleneck if total is None else total + bottleneck
        if total is None:
            total = Fraction(0)
        return total

    def flow_on(self, ei: int):
        """Flow pushed through forward edge index ei after max_flow."""
        used = self._caps0[ei] - self.edges[ei][2]
        return used if used > 0 else used * 0

    def residual_reachable(self, s):
        """Source side of a minimum cut, after max_flow has run."""
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for ei in self.adj[u]:
                _, v, cap = self.edges[ei]
                if cap > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen
