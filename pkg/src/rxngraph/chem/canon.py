"""Canonical labelling of small vertex- and edge-labelled graphs.

Iterative neighbourhood refinement (Morgan-style) produces an ordered
equitable partition; remaining ties are broken by an
individualisation-refinement search that keeps the lexicographically
smallest certificate.  Leaves equivalent to the first leaf reveal
automorphisms, which prune the rest of the search in the usual way.

Node labels and edge labels only need to be mutually comparable within one
graph.
"""

from __future__ import annotations

from collections import Counter
from typing import Hashable, Sequence

Adjacency = Sequence[Sequence[tuple[int, int]]]


def initial_ranks(labels: Sequence[Hashable]) -> list[int]:
    uniq = sorted(set(labels))
    rank = {lab: i for i, lab in enumerate(uniq)}
    return [rank[lab] for lab in labels]


def refine(cells: list[int], adj: Adjacency) -> list[int]:
    """Refine an ordered partition until it is equitable.

    ``cells[v]`` is the rank of v's cell; ranks are dense and their order is
    preserved by refinement, so the result is isomorphism-invariant.
    """
    n = len(cells)
    k = len(set(cells))
    while True:
        sigs = [
            (cells[v], tuple(sorted((b, cells[u]) for u, b in adj[v])))
            for v in range(n)
        ]
        uniq = sorted(set(sigs))
        if len(uniq) == k:
            return cells
        rank = {s: i for i, s in enumerate(uniq)}
        cells = [rank[s] for s in sigs]
        k = len(uniq)


def equitable_classes(labels: Sequence[Hashable], adj: Adjacency) -> list[int]:
    """Isomorphism-invariant class id per node (the root equitable partition)."""
    return refine(initial_ranks(labels), adj)


def _individualize(cells: list[int], v: int) -> list[int]:
    keyed = [(c, 0 if w == v else 1) for w, c in enumerate(cells)]
    return initial_ranks(keyed)


def _certificate(cells, node_ranks, edges):
    n = len(cells)
    order = sorted(range(n), key=cells.__getitem__)
    pos = [0] * n
    for i, v in enumerate(order):
        pos[v] = i
    cert_nodes = tuple(node_ranks[v] for v in order)
    cert_edges = tuple(sorted(
        (min(pos[a], pos[b]), max(pos[a], pos[b]), lab) for a, b, lab in edges
    ))
    return (cert_nodes, cert_edges), pos


class _Search:
    def __init__(self, node_ranks, adj, edges):
        self.node_ranks = node_ranks
        self.adj = adj
        self.edges = edges
        self.first = None  # (cert, pos)
        self.best = None  # (cert, pos)
        # (divergence depth, permutation) pairs
        self.automorphisms: list[tuple[int, list[int]]] = []

    def run(self, cells):
        self._visit(cells, depth=0, first_path=True)
        return self.best

    def _visit(self, cells, depth, first_path):
        """Return the depth to which the search should unwind, or None."""
        n = len(cells)
        if len(set(cells)) == n:
            cert, pos = _certificate(cells, self.node_ranks, self.edges)
            if self.first is None:
                self.first = self.best = (cert, pos)
                return None
            if cert == self.first[0]:
                gamma = [0] * n
                inv_first = [0] * n
                for v, p in enumerate(self.first[1]):
                    inv_first[p] = v
                for v, p in enumerate(pos):
                    gamma[inv_first[p]] = v
                self.automorphisms.append((self._diverge, gamma))
                return self._diverge
            if cert < self.best[0]:
                self.best = (cert, pos)
            return None

        sizes = Counter(cells)
        target = min(c for c, k in sizes.items() if k > 1)
        members = [v for v in range(n) if cells[v] == target]
        explored: list[int] = []
        for v in members:
            if first_path and explored and self._same_orbit(v, explored, depth):
                continue
            explored.append(v)
            child_first = first_path and len(explored) == 1
            if first_path and not child_first:
                self._diverge = depth
            unwind = self._visit(
                refine(_individualize(cells, v), self.adj), depth + 1, child_first
            )
            if unwind is not None and unwind < depth:
                return unwind
        return None

    def _same_orbit(self, v, explored, depth):
        gens = [g for d, g in self.automorphisms if d >= depth]
        if not gens:
            return False
        seen = set(explored)
        stack = list(explored)
        while stack:
            u = stack.pop()
            for g in gens:
                w = g[u]
                if w not in seen:
                    if w == v:
                        return True
                    seen.add(w)
                    stack.append(w)
        return False


def canonical_order(
    labels: Sequence[Hashable],
    edges: Sequence[tuple[int, int, int]],
) -> tuple[list[int], tuple]:
    """Canonical position of every node plus the graph certificate.

    ``edges`` are ``(a, b, label)`` triples with integer labels.  Two
    labelled graphs are isomorphic iff their certificates are equal, and
    isomorphic inputs receive positions that map onto the same labelled
    graph.
    """
    n = len(labels)
    if n == 0:
        return [], ((), ())
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for a, b, lab in edges:
        adj[a].append((b, lab))
        adj[b].append((a, lab))
    node_ranks = initial_ranks(labels)
    root = refine(list(node_ranks), adj)
    search = _Search(node_ranks, adj, edges)
    search._diverge = 0
    cert, pos = search.run(root)
    return pos, cert
