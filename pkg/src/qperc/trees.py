"""Galton-Watson tree samplers and the catalog of small unlabeled trees."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import OffspringDistribution, SkeletonLaws, size_bias_shift
from .errors import CapExceededError
from .graphs import Graph, write_edge_list

MAX_CATALOG_K = 12
EIG_DEDUP_TOL = 1e-8


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class RootedTree:
    """A rooted tree with vertices numbered in breadth-first order.

    ``parent[0] == -1``; vertices of depth ``d`` occupy the contiguous slice
    ``level_ptr[d]:level_ptr[d+1]``.  ``depth_limit`` is ``None`` for trees
    grown to extinction.
    """

    parent: np.ndarray
    depths: np.ndarray
    level_ptr: np.ndarray
    depth_limit: int | None
    truncated: bool
    graph: Graph = field(init=False, repr=False)

    def __post_init__(self):
        child = np.arange(1, self.parent.size)
        object.__setattr__(self, "graph", Graph(self.parent.size,
                                                np.column_stack([self.parent[1:], child])))

    @property
    def n(self) -> int:
        return int(self.parent.size)

    @property
    def height(self) -> int:
        return self.level_ptr.size - 2

    def offspring_counts(self) -> np.ndarray:
        return np.bincount(self.parent[1:], minlength=self.n)


def _grow(root_law, law, depth, vertex_cap, rng, cap_is_error=False) -> RootedTree:
    parent = [np.array([-1], dtype=np.int64)]
    level = np.array([0], dtype=np.int64)
    level_ptr = [0, 1]
    n = 1
    truncated = False
    d = 0
    while level.size:
        counts = (root_law if d == 0 else law).sample(rng, level.size)
        if depth is not None and d >= depth:
            truncated = bool(counts.any())
            break
        total = int(counts.sum())
        if total == 0:
            break
        if vertex_cap is not None and n + total > vertex_cap:
            if cap_is_error:
                raise CapExceededError(f"tree exceeded the vertex cap {vertex_cap}")
            keep = vertex_cap - n
            truncated = True
            if keep == 0:
                break
            kids = np.repeat(level, counts)[:keep]
        else:
            kids = np.repeat(level, counts)
        parent.append(kids)
        level = np.arange(n, n + kids.size, dtype=np.int64)
        n += kids.size
        level_ptr.append(n)
        d += 1
        if truncated:
            break
    parent = np.concatenate(parent)
    level_ptr = np.asarray(level_ptr, dtype=np.int64)
    depths = np.repeat(np.arange(level_ptr.size - 1), np.diff(level_ptr))
    return RootedTree(parent, depths, level_ptr, depth, truncated)


def sample_gw(P: OffspringDistribution, depth: int, vertex_cap: int | None = None,
              rng=None) -> RootedTree:
    """Galton-Watson tree cut at ``depth`` and, optionally, at ``vertex_cap`` vertices.

    ``truncated`` records whether anything was cut off: a vertex at the last
    level with unborn children, or vertices dropped by the cap.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if vertex_cap is not None and vertex_cap < 1:
        raise ValueError("vertex_cap must be >= 1")
    return _grow(P, P, depth, vertex_cap, _as_rng(rng))


def sample_ugw(P: OffspringDistribution, depth: int, vertex_cap: int | None = None,
               rng=None) -> RootedTree:
    """Unimodular GW tree: root offspring ``P``, all others the size-biased shift."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    return _grow(P, size_bias_shift(P), depth, vertex_cap, _as_rng(rng))


def sample_extinct_tree(L: SkeletonLaws, vertex_cap: int = 10**6, rng=None) -> RootedTree:
    """A complete GW tree with the extinct-subtree offspring law."""
    if L.extinct_offspring is None:
        raise ValueError("extinction probability is 0: extinct subtrees never occur")
    Q = L.extinct_offspring
    return _grow(Q, Q, None, vertex_cap, _as_rng(rng), cap_is_error=True)


def total_progeny_tail_bound(Q: OffspringDistribution, rho: float, t: int) -> float:
    """Upper bound ``rho * (psi(rho) / rho)**t`` on ``P(total progeny >= t)``."""
    if rho <= 1:
        raise ValueError("rho must exceed 1")
    if t < 1:
        raise ValueError("t must be >= 1")
    psi = Q.pgf(rho, extended=True)
    if psi >= rho:
        raise ValueError(f"psi(rho) = {psi} >= rho = {rho}: bound does not apply")
    return float(rho * (psi / rho) ** t)


def extinction_frequency(P: OffspringDistribution, n_trees: int, rng=None,
                         survive_at: int = 256, max_generations: int = 10**5):
    """Monte Carlo extinction frequency from generation sizes.

    A process whose generation reaches ``survive_at`` individuals is counted
    as surviving; the misclassification probability is ``pi_e**survive_at``.
    Returns ``(frequency, standard_error)``.
    """
    rng = _as_rng(rng)
    z = np.ones(n_trees, dtype=np.int64)
    for _ in range(max_generations):
        live = np.flatnonzero((z > 0) & (z < survive_at))
        if live.size == 0:
            break
        draws = P.sample(rng, int(z[live].sum()))
        starts = np.concatenate([[0], np.cumsum(z[live])[:-1]])
        z[live] = np.add.reduceat(draws, starts)
    else:
        raise RuntimeError("generation cap reached before every process resolved")
    freq = float(np.mean(z == 0))
    return freq, float(np.sqrt(freq * (1 - freq) / n_trees))


# -- unlabeled tree catalog --------------------------------------------------

def rooted_level_sequences(k: int):
    """All rooted trees on ``k`` vertices as canonical level sequences
    (root at level 0), in Beyer-Hedetniemi successor order."""
    if k < 1:
        return
    seq = list(range(k))
    while True:
        yield tuple(seq)
        p = k - 1
        while p > 0 and seq[p] <= 1:
            p -= 1
        if p == 0:
            return
        q = p - 1
        while seq[q] != seq[p] - 1:
            q -= 1
        for i in range(p, k):
            seq[i] = seq[i - (p - q)]


def level_sequence_edges(seq) -> list[tuple[int, int]]:
    stack: list[int] = []
    edges = []
    for i, lev in enumerate(seq):
        del stack[lev:]
        if stack:
            edges.append((stack[-1], i))
        stack.append(i)
    return edges


def _adjacency(k, edges):
    adj = [[] for _ in range(k)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def _rooted_code(adj, root) -> str:
    # iterative post-order AHU encoding
    order, parent = [root], {root: -1}
    for u in order:
        for w in adj[u]:
            if w != parent[u]:
                parent[w] = u
                order.append(w)
    code = {}
    for u in reversed(order):
        code[u] = "(" + "".join(sorted(code[w] for w in adj[u] if w != parent[u])) + ")"
    return code[root]


def tree_centers(adj) -> list[int]:
    k = len(adj)
    deg = [len(a) for a in adj]
    leaves = [v for v in range(k) if deg[v] <= 1]
    remaining = k
    while remaining > 2:
        remaining -= len(leaves)
        nxt = []
        for v in leaves:
            for w in adj[v]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        leaves = nxt
    return sorted(leaves) if k > 1 else [0]


def free_tree_code(k: int, edges) -> str:
    """Isomorphism-invariant code of an unrooted tree (AHU at the center)."""
    adj = _adjacency(k, edges)
    return min(_rooted_code(adj, c) for c in tree_centers(adj))


def rooted_tree_code(k: int, edges, root: int = 0) -> str:
    return _rooted_code(_adjacency(k, edges), root)


def _symmetric_spectrum(A: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(A)
    # bipartite graphs: the spectrum is symmetric; enforce it bit-for-bit
    return (w - w[::-1]) / 2.0


def _dedup_symmetric(values: np.ndarray, tol: float) -> np.ndarray:
    pos = np.sort(values[values >= 0.0])
    if pos.size == 0:
        return pos
    keep = np.concatenate([[True], np.diff(pos) > tol])
    reps = pos[keep]
    if reps[0] <= tol:
        reps[0] = 0.0
    neg = -reps[reps > 0][::-1]
    return np.concatenate([neg, reps])


@dataclass(frozen=True, eq=False)
class TreeCatalog:
    k: int
    trees: list
    spectra: list
    lambda_k: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "tree_index", "eigenvalue"])
            for i, spec in enumerate(self.spectra):
                for lam in spec:
                    w.writerow([self.k, i, repr(float(lam))])

    def export(self, directory) -> Path:
        """Write one edge-list file per tree plus the eigenvalue CSV."""
        directory = Path(directory)
        bundle = directory / f"trees_k{self.k}"
        bundle.mkdir(parents=True, exist_ok=True)
        for i, g in enumerate(self.trees):
            write_edge_list(g, bundle / f"tree_{i:04d}.txt")
        self.to_csv(directory / f"catalog_k{self.k}.csv")
        return bundle


def enumerate_trees(k: int, tol: float = EIG_DEDUP_TOL) -> TreeCatalog:
    """All unlabeled trees on ``k`` vertices and the union of their spectra."""
    if not 1 <= k <= MAX_CATALOG_K:
        raise ValueError(f"catalog supports 1 <= k <= {MAX_CATALOG_K}")
    seen = set()
    trees, spectra = [], []
    for seq in rooted_level_sequences(k):
        edges = level_sequence_edges(seq)
        code = free_tree_code(k, edges)
        if code in seen:
            continue
        seen.add(code)
        g = Graph(k, edges)
        trees.append(g)
        spectra.append(_symmetric_spectrum(g.adjacency_matrix()))
    lam = _dedup_symmetric(np.concatenate(spectra), tol)
    return TreeCatalog(k, trees, spectra, lam)
