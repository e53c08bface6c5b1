"""Weighted graphs carrying a probability measure on edges.

The edge measure is the primitive; vertex measures are derived from it.
For a plain graph nu(v) is half the mass of edges at v, so vertex masses
sum to one.  A bipartite graph additionally treats each side as its own
probability space, where the side measure of v is the full mass of edges
at v.
"""
from __future__ import annotations

import numpy as np

from .errors import EmptyGraph, NotBipartite

TOL = 1e-9


class WGraph:
    """Undirected weighted graph, immutable after construction.

    Edges are stored as sorted vertex pairs with strictly positive weights
    normalized to sum one.  Isolated vertices are not representable: the
    vertex set is the union of edge endpoints.
    """

    __slots__ = ("vertices", "edges", "weights", "sides", "_pos", "_adj", "_vmass")

    def __init__(self, edges, sides=None):
        """``edges`` is an iterable of (u, v, weight) triples.

        ``sides``, when given, is a pair of vertex collections declaring a
        bipartition; every edge must cross it.
        """
        cleaned = {}
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"loop edge at {u!r}")
            if w <= 0:
                raise ValueError(f"edge {(u, v)!r} has non-positive weight {w}")
            key = (u, v) if u < v else (v, u)
            if key in cleaned:
                raise ValueError(f"duplicate edge {key!r}")
            cleaned[key] = float(w)
        if not cleaned:
            raise EmptyGraph("graph has no edges")

        self.edges = tuple(sorted(cleaned))
        weights = np.array([cleaned[e] for e in self.edges], dtype=float)
        self.weights = weights / weights.sum()
        self.vertices = tuple(sorted({x for e in self.edges for x in e}))
        self._pos = {v: i for i, v in enumerate(self.vertices)}

        self._adj = {v: [] for v in self.vertices}
        for i, (u, v) in enumerate(self.edges):
            self._adj[u].append((v, i))
            self._adj[v].append((u, i))

        vmass = np.zeros(len(self.vertices))
        for i, (u, v) in enumerate(self.edges):
            vmass[self._pos[u]] += self.weights[i]
            vmass[self._pos[v]] += self.weights[i]
        self._vmass = vmass  # twice the vertex measure

        if sides is not None:
            left, right = frozenset(sides[0]), frozenset(sides[1])
            if left & right:
                raise NotBipartite("sides overlap")
            missing = set(self.vertices) - (left | right)
            if missing:
                raise NotBipartite(f"vertices outside both sides: {sorted(missing)[:4]}")
            for u, v in self.edges:
                if (u in left) == (v in left):
                    raise NotBipartite(f"edge {(u, v)!r} does not cross the partition")
            # drop side members that ended up isolated
            self.sides = (left & set(self.vertices), right & set(self.vertices))
        else:
            self.sides = None

    # --- basic accessors ---

    @property
    def n(self):
        return len(self.vertices)

    @property
    def m(self):
        return len(self.edges)

    def vertex_index(self, v):
        return self._pos[v]

    def vertex_measure(self, v):
        """nu(v) = half the total weight of edges at v."""
        return 0.5 * self._vmass[self._pos[v]]

    def vertex_measures(self):
        return 0.5 * self._vmass

    def side_measure(self, v):
        """Per-side vertex mass used by the bipartite operator."""
        if self.sides is None:
            raise NotBipartite("graph has no declared bipartition")
        return self._vmass[self._pos[v]]

    def neighbors(self, v):
        return [u for u, _ in self._adj[v]]

    def incident(self, v):
        """List of (neighbor, edge index) pairs."""
        return list(self._adj[v])

    def edge_weight(self, u, v):
        key = (u, v) if u < v else (v, u)
        for w, i in self._adj.get(key[0], ()):
            if w == key[1]:
                return self.weights[i]
        raise KeyError(f"{key!r} is not an edge")

    def has_edge(self, u, v):
        key = (u, v) if u < v else (v, u)
        return any(w == key[1] for w, _ in self._adj.get(key[0], ()))

    def connected_components(self):
        """List of vertex sets, one per component of the graph."""
        seen = set()
        comps = []
        for start in self.vertices:
            if start in seen:
                continue
            stack = [start]
            comp = {start}
            seen.add(start)
            while stack:
                x = stack.pop()
                for y, _ in self._adj[x]:
                    if y not in comp:
                        comp.add(y)
                        seen.add(y)
                        stack.append(y)
            comps.append(comp)
        return comps

    def is_connected(self):
        return len(self.connected_components()) == 1

    def reweighted(self, new_weights):
        """Same edge set with a different weight vector."""
        sides = None if self.sides is None else (self.sides[0], self.sides[1])
        return WGraph(
            [(u, v, w) for (u, v), w in zip(self.edges, new_weights)], sides=sides
        )

    def with_sides(self, left, right):
        return WGraph(
            [(u, v, w) for (u, v), w in zip(self.edges, self.weights)],
            sides=(left, right),
        )

    def __repr__(self):
        bip = " bipartite" if self.sides is not None else ""
        return f"WGraph(n={self.n}, m={self.m}{bip})"
