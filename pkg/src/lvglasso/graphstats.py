"""Graphs from precision estimates and the statistics used to compare them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DataError


class CliqueLimitError(RuntimeError):
    """Clique enumeration hit its cap; ``partial`` holds what was found."""

    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


@dataclass
class GraphEstimate:
    adjacency: np.ndarray
    source: dict = field(default_factory=dict)
    zero_tol: float = 0.0

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=bool)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DataError(f"adjacency must be square, got {A.shape}")
        if not np.array_equal(A, A.T):
            raise DataError("adjacency must be symmetric")
        if np.any(np.diag(A)):
            raise DataError("adjacency must not contain self-loops")
        self.adjacency = A

    @property
    def p(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> list:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    @property
    def n_edges(self) -> int:
        return int(np.triu(self.adjacency, 1).sum())

    def neighbors(self) -> list:
        return [set(np.flatnonzero(row).tolist()) for row in self.adjacency]


def extract_graph(S, zero_tol: float = 1e-8, source: Optional[dict] = None) -> GraphEstimate:
    """Edge (i, j) iff |S_ij| > zero_tol * max(1, max_k |S_kk|)."""
    S = np.asarray(S, dtype=float)
    cutoff = zero_tol * max(1.0, float(np.max(np.abs(np.diag(S))))) if S.size else 0.0
    A = np.abs(S) > cutoff
    A = A & A.T
    np.fill_diagonal(A, False)
    return GraphEstimate(A, dict(source or {}), zero_tol)


def edge_overlap(a: GraphEstimate, b: GraphEstimate):
    """(shared, only in a, only in b) over unordered pairs."""
    if a.p != b.p:
        raise DataError(f"graphs have different sizes {a.p} and {b.p}")
    A = np.triu(a.adjacency, 1)
    B = np.triu(b.adjacency, 1)
    return int(np.sum(A & B)), int(np.sum(A & ~B)), int(np.sum(~A & B))


def support_f1(a: GraphEstimate, truth: GraphEstimate) -> float:
    shared, fp, fn = edge_overlap(a, truth)
    denom = 2 * shared + fp + fn
    return 1.0 if denom == 0 else 2 * shared / denom


def maximal_cliques(g: GraphEstimate, max_cliques: Optional[int] = None) -> list:
    """All maximal cliques (Bron-Kerbosch with Tomita pivoting).

    Each clique is a sorted tuple; the list is sorted lexicographically.
    Isolated vertices come out as singletons.
    """
    nbrs = g.neighbors()
    found = []
    # explicit stack avoids recursion limits on dense graphs
    stack = [(frozenset(), set(range(g.p)), set())]
    while stack:
        R, P, X = stack.pop()
        if not P and not X:
            found.append(tuple(sorted(R)))
            if max_cliques is not None and len(found) > max_cliques:
                raise CliqueLimitError(f"more than {max_cliques} maximal cliques",
                                       sorted(found))
            continue
        pivot = max(P | X, key=lambda u: len(P & nbrs[u]))
        for v in sorted(P - nbrs[pivot]):
            stack.append((R | {v}, P & nbrs[v], X & nbrs[v]))
            P = P - {v}
            X = X | {v}
    return sorted(found)


@dataclass
class GraphSummary:
    edges: int
    isolated: int
    cliques: int
    singleton_cliques: int
    largest_clique: int
    degrees: list

    def as_dict(self) -> dict:
        return dict(edges=self.edges, isolated=self.isolated, cliques=self.cliques,
                    singleton_cliques=self.singleton_cliques,
                    largest_clique=self.largest_clique, degrees=list(self.degrees))


def graph_summary(g: GraphEstimate, max_cliques: Optional[int] = None) -> GraphSummary:
    """Edge count, isolated vertices, maximal cliques (non-singleton headline
    count, singletons separately), largest clique size, degree sequence."""
    deg = g.adjacency.sum(axis=1).astype(int).tolist()
    cl = maximal_cliques(g, max_cliques)
    big = [c for c in cl if len(c) > 1]
    largest = max((len(c) for c in cl), default=0)
    return GraphSummary(g.n_edges, sum(d == 0 for d in deg), len(big), len(cl) - len(big),
                        largest, deg)


def top_pairs(S, k: int) -> list:
    """The k off-diagonal pairs with largest |S_ij|, descending; ties by (i, j)."""
    S = np.asarray(S, dtype=float)
    if k < 1:
        raise ValueError("k must be >= 1")
    i, j = np.triu_indices(S.shape[0], 1)
    vals = S[i, j]
    order = np.lexsort((j, i, -np.abs(vals)))[:k]
    return [(int(i[o]), int(j[o]), float(vals[o])) for o in order]
