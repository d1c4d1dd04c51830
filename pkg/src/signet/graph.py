"""Signed digraph model and per-graph combinatorial analyses.

Weights are held in an n-by-n matrix ``adj`` where ``adj[i][j]`` is the
weight an edge from node j+1 to node i+1 carries (rows receive, columns
send). Positive weights are cooperative, negative ones antagonistic. All
values are immutable after construction and every operation here is a pure
function, so graphs can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GraphConstructionError

# Entries at or below this magnitude are treated as structural zeros by the
# connectivity and balance analyses, so rounding noise never acquires a sign.
STRUCTURAL_ZERO = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SignedDigraph:
    """A weighted signed digraph on nodes 1..n with zero diagonal."""

    n: int
    adj: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adj, dtype=np.float64)
        if adj.shape != (self.n, self.n):
            raise GraphConstructionError(
                f"adjacency shape {adj.shape} does not match n={self.n}"
            )
        if not np.all(np.isfinite(adj)):
            raise GraphConstructionError("adjacency contains non-finite entries")
        if self.n and np.any(np.diagonal(adj) != 0.0):
            raise GraphConstructionError("diagonal entries must be zero")
        object.__setattr__(self, "adj", _frozen(adj))

    def support(self) -> np.ndarray:
        """Boolean edge-presence matrix at the structural-zero tolerance."""
        return np.abs(self.adj) > STRUCTURAL_ZERO


@dataclass(frozen=True, eq=False)
class LaplacianParts:
    """The flow matrix of a signed digraph and its additive pieces.

    ``laplacian`` carries absolute row sums on the diagonal and negated
    weights off it. It always splits as
    ``(cooperative + antagonistic_degree) + antagonistic_coupling``, where the
    first two terms form a diagonally dominant matrix with nonpositive
    off-diagonal entries and the last is nonnegative. ``laplacian_abs`` is the
    ordinary Laplacian of the unsigned weights and has zero row sums.
    """

    laplacian: np.ndarray
    cooperative: np.ndarray
    antagonistic_degree: np.ndarray
    antagonistic_coupling: np.ndarray
    laplacian_abs: np.ndarray

    def base(self) -> np.ndarray:
        """The substochastic generator part: cooperative + antagonistic_degree."""
        return self.cooperative + self.antagonistic_degree


@dataclass(frozen=True, eq=False)
class GaugeVector:
    """Diagonal +-1 signature certifying structural balance.

    Canonical form: within every weakly connected component of the support
    the smallest-index node carries +1, which makes certificates reproducible.
    """

    signs: np.ndarray

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.float64)
        if signs.ndim != 1 or not np.all(np.abs(signs) == 1.0):
            raise ValueError("gauge entries must be +1 or -1")
        object.__setattr__(self, "signs", _frozen(signs))

    def as_diagonal(self) -> np.ndarray:
        return np.diag(self.signs)

    def conjugate(self, matrix: np.ndarray) -> np.ndarray:
        """Return D @ matrix @ D without forming the diagonal matrix."""
        return self.signs[:, None] * np.asarray(matrix) * self.signs[None, :]


@dataclass(frozen=True, eq=False)
class UnionGraph:
    """Edge-set union of a graph family, with observed signs per pair.

    ``support[i][j]`` says some member carries the edge; ``has_positive`` and
    ``has_negative`` record which nonzero signs were observed for the pair
    across the family. Weights are never summed.
    """

    n: int
    support: np.ndarray
    has_positive: np.ndarray
    has_negative: np.ndarray

    def sign_conflicts(self) -> np.ndarray:
        """Pairs observed with both signs across the family."""
        return self.has_positive & self.has_negative


def build_graph(n: int, edges) -> SignedDigraph:
    """Assemble a graph from 1-based (src, dst, weight) triples.

    The edge (src, dst) makes src a neighbor of dst, i.e. it lands in
    ``adj[dst-1][src-1]``. Self loops, repeated ordered pairs, zero and
    non-finite weights are rejected.
    """
    if n < 1:
        raise GraphConstructionError("node count must be positive")
    adj = np.zeros((n, n))
    seen = set()
    for src, dst, weight in edges:
        if not (1 <= src <= n and 1 <= dst <= n):
            raise GraphConstructionError(f"edge ({src},{dst}) out of range 1..{n}")
        if src == dst:
            raise GraphConstructionError(f"self loop on node {src}")
        if (src, dst) in seen:
            raise GraphConstructionError(f"duplicate edge ({src},{dst})")
        w = float(weight)
        if not np.isfinite(w):
            raise GraphConstructionError(f"non-finite weight on edge ({src},{dst})")
        if w == 0.0:
            raise GraphConstructionError(
                f"zero weight on edge ({src},{dst}); omit the edge instead"
            )
        seen.add((src, dst))
        adj[dst - 1, src - 1] = w
    return SignedDigraph(n=n, adj=adj)


def sign_split(g: SignedDigraph) -> tuple[np.ndarray, np.ndarray]:
    """Split weights into a nonnegative and a nonpositive matrix summing to adj."""
    plus = np.where(g.adj > 0.0, g.adj, 0.0)
    minus = np.where(g.adj < 0.0, g.adj, 0.0)
    return plus, minus


def laplacian_parts(g: SignedDigraph) -> LaplacianParts:
    """All five flow-matrix pieces for a graph; the split identity is exact."""
    plus, minus = sign_split(g)
    abs_minus = np.abs(minus)
    abs_adj = np.abs(g.adj)
    laplacian = np.diag(abs_adj.sum(axis=1)) - g.adj
    cooperative = np.diag(plus.sum(axis=1)) - plus
    antagonistic_degree = np.diag(abs_minus.sum(axis=1))
    laplacian_abs = np.diag(abs_adj.sum(axis=1)) - abs_adj
    return LaplacianParts(
        laplacian=_frozen(laplacian),
        cooperative=_frozen(cooperative),
        antagonistic_degree=_frozen(antagonistic_degree),
        antagonistic_coupling=_frozen(abs_minus),
        laplacian_abs=_frozen(laplacian_abs),
    )


class ParityUnionFind:
    """Union-find where each node carries a +-1 relation to its root."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.opposite = [False] * n  # parity relative to parent

    def find(self, v: int) -> tuple[int, bool]:
        path = []
        while self.parent[v] != v:
            path.append(v)
            v = self.parent[v]
        parity = False
        for node in reversed(path):
            parity ^= self.opposite[node]
            self.parent[node] = v
            self.opposite[node] = parity
        return v, parity

    def union(self, a: int, b: int, opposite: bool) -> bool:
        """Impose the relation; returns False on contradiction."""
        ra, pa = self.find(a)
        rb, pb = self.find(b)
        if ra == rb:
            return (pa ^ pb) == opposite
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
            pa, pb = pb, pa
        self.parent[rb] = ra
        self.opposite[rb] = pa ^ pb ^ opposite
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def gauge_from_sign_constraints(n: int, constraints) -> GaugeVector | None:
    """Solve d_i * d_j = sign for the given pair constraints.

    ``constraints`` yields (i, j, negative) with 0-based nodes; ``negative``
    means the two nodes must take opposite signs. Returns the canonical gauge
    or None when the constraints contradict each other.
    """
    uf = ParityUnionFind(n)
    for i, j, negative in constraints:
        if not uf.union(i, j, negative):
            return None
    roots = [uf.find(v) for v in range(n)]
    anchor: dict[int, bool] = {}
    signs = np.ones(n)
    for v, (root, parity) in enumerate(roots):
        if root not in anchor:
            # v is the smallest-index node of its component; pin it to +1.
            anchor[root] = parity
        signs[v] = -1.0 if (parity ^ anchor[root]) else 1.0
    return GaugeVector(signs=signs)


def _sign_constraints_of(adj: np.ndarray):
    rows, cols = np.nonzero(np.abs(adj) > STRUCTURAL_ZERO)
    for i, j in zip(rows.tolist(), cols.tolist()):
        yield i, j, adj[i, j] < 0.0


def check_structural_balance(g: SignedDigraph) -> GaugeVector | None:
    """Canonical gauge with D adj D = |adj| if one exists, else None.

    Any reciprocal pair with opposite signs, or any cycle whose constraint
    product is negative, makes the graph unbalanced.
    """
    return gauge_from_sign_constraints(g.n, _sign_constraints_of(g.adj))


def check_digon_symmetry(g: SignedDigraph) -> bool:
    """True when no reciprocal pair carries opposite signs."""
    return bool(np.all(g.adj * g.adj.T >= 0.0))


def strongly_connected_support(support: np.ndarray) -> bool:
    """Strong connectivity of a boolean adjacency via two reachability sweeps.

    ``support[i][j]`` is the edge j -> i. Strongly connected means node 0
    reaches every node along edges and against them.
    """
    n = support.shape[0]
    if n <= 1:
        return True

    def reaches_all(mat: np.ndarray) -> bool:
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            v = stack.pop()
            for w in np.nonzero(mat[:, v])[0]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
        return bool(seen.all())

    return reaches_all(support) and reaches_all(support.T)


def is_strongly_connected(g: SignedDigraph) -> bool:
    """Strong connectivity of the directed support, ignoring signs."""
    return strongly_connected_support(g.support())


def weak_components(support: np.ndarray) -> np.ndarray:
    """Component label per node on the symmetrized support."""
    n = support.shape[0]
    sym = support | support.T
    labels = np.full(n, -1, dtype=np.int64)
    label = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = label
        stack = [start]
        while stack:
            v = stack.pop()
            for w in np.nonzero(sym[v])[0]:
                if labels[w] < 0:
                    labels[w] = label
                    stack.append(int(w))
        label += 1
    return labels


def union_graphs(gs) -> UnionGraph:
    """Edge-set union of same-order graphs, keeping observed signs per pair."""
    gs = list(gs)
    if not gs:
        raise GraphConstructionError("union of an empty graph list")
    n = gs[0].n
    for g in gs:
        if g.n != n:
            raise GraphConstructionError(
                f"union over mismatched node counts {g.n} != {n}"
            )
    has_positive = np.zeros((n, n), dtype=bool)
    has_negative = np.zeros((n, n), dtype=bool)
    for g in gs:
        has_positive |= g.adj > STRUCTURAL_ZERO
        has_negative |= g.adj < -STRUCTURAL_ZERO
    return UnionGraph(
        n=n,
        support=has_positive | has_negative,
        has_positive=has_positive,
        has_negative=has_negative,
    )
