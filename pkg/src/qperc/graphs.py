"""Finite simple graphs, bond percolation, metric balls and ball statistics."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConvergenceError

DEFAULT_SIZE_CAP = 4096


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``.

    Stored in CSR form: the neighbours of ``v`` are
    ``indices[indptr[v]:indptr[v+1]]``, sorted ascending.
    """

    __slots__ = ("n", "edges", "indptr", "indices")

    def __init__(self, n: int, edges=()):
        n = int(n)
        e = np.array(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            e = np.sort(e, axis=1)
            e = e[np.lexsort((e[:, 1], e[:, 0]))]
            if np.any(np.all(e[1:] == e[:-1], axis=1)):
                raise ValueError("duplicate edges are not allowed")
        self.n = n
        self.edges = e
        self.edges.setflags(write=False)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        self.indices = dst[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self.indptr[1:])
        self.indices.setflags(write=False)
        self.indptr.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        a[self.edges[:, 0], self.edges[:, 1]] = 1.0
        a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def subgraph(self, vertices) -> "Graph":
        """Induced subgraph, relabelled in the order given."""
        vertices = np.asarray(vertices, dtype=np.int64)
        relabel = np.full(self.n, -1, dtype=np.int64)
        relabel[vertices] = np.arange(vertices.size)
        e = relabel[self.edges]
        e = e[(e[:, 0] >= 0) & (e[:, 1] >= 0)]
        return Graph(vertices.size, e)

    def __eq__(self, other):
        return (isinstance(other, Graph) and self.n == other.n
                and np.array_equal(self.edges, other.edges))

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    # -- builders -----------------------------------------------------------
    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise ValueError("a simple cycle needs n >= 3")
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def star(cls, leaves: int) -> "Graph":
        return cls(leaves + 1, [(0, i) for i in range(1, leaves + 1)])

    @classmethod
    def petersen(cls) -> "Graph":
        outer = [(i, (i + 1) % 5) for i in range(5)]
        spokes = [(i, i + 5) for i in range(5)]
        inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
        return cls(10, outer + spokes + inner)

    @classmethod
    def from_spec(cls, spec: str, rng=None) -> "Graph":
        """Named graphs: ``cycle:n``, ``path:n``, ``complete:n``, ``star:k``,
        ``petersen``, ``empty:n``, ``random_regular:n:d``, or an edge-list path."""
        parts = spec.split(":")
        name, args = parts[0], [int(a) for a in parts[1:]] if len(parts) > 1 else []
        if name == "petersen":
            return cls.petersen()
        if name in ("cycle", "path", "complete", "star", "empty") and len(args) == 1:
            return getattr(cls, name)(args[0])
        if name == "random_regular" and len(args) == 2:
            return random_regular(args[0], args[1], rng)
        if Path(spec).is_file():
            return read_edge_list(spec)
        raise ValueError(f"unrecognised graph spec {spec!r}")


def read_edge_list(path) -> Graph:
    """Parse the ``n m`` header + ``u v`` lines format."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    n, m = int(lines[0][0]), int(lines[0][1])
    edges = [(int(u), int(v)) for u, v in lines[1:]]
    if len(edges) != m:
        raise ValueError(f"header announces {m} edges, found {len(edges)}")
    return Graph(n, edges)


def write_edge_list(G: Graph, path) -> None:
    body = "".join(f"{u} {v}\n" for u, v in G.edges)
    Path(path).write_text(f"{G.n} {G.m}\n{body}")


def random_regular(n: int, d: int, rng=None, max_restarts: int = 10**5) -> Graph:
    """Uniform simple ``d``-regular graph via the configuration model.

    Half-edges are paired uniformly; any self-loop or multi-edge triggers a
    full restart, so the accepted graph is uniform among simple graphs.
    """
    if (n * d) % 2:
        raise ValueError("n * d must be even")
    if not 0 <= d < n:
        raise ValueError("need 0 <= d < n")
    rng = _as_rng(rng)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(max_restarts):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        pairs.sort(axis=1)
        key = pairs[:, 0] * n + pairs[:, 1]
        if np.unique(key).size != key.size:
            continue
        return Graph(n, pairs)
    raise ConvergenceError(f"no simple {d}-regular graph after {max_restarts} restarts")


def percolate(G: Graph, p: float, rng=None) -> Graph:
    """Keep each edge independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = _as_rng(rng)
    keep = rng.random(G.m) < p
    return Graph(G.n, G.edges[keep])


def bfs_depths(G: Graph, v: int, h: int | None = None) -> dict[int, int]:
    """Distances from ``v`` to every vertex within ``h`` (all if ``h`` is None)."""
    depth = {v: 0}
    queue = deque([v])
    indptr, indices = G.indptr, G.indices
    while queue:
        u = queue.popleft()
        du = depth[u]
        if h is not None and du >= h:
            continue
        for w in indices[indptr[u]:indptr[u + 1]].tolist():
            if w not in depth:
                depth[w] = du + 1
                queue.append(w)
    return depth


def connected_component(G: Graph, v: int) -> np.ndarray:
    return np.fromiter(bfs_depths(G, v), dtype=np.int64)


def connected_components(G: Graph) -> list[np.ndarray]:
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components as _cc

    mat = csr_matrix((np.ones(G.indices.size), G.indices, G.indptr), shape=(G.n, G.n))
    k, labels = _cc(mat, directed=False)
    order = np.argsort(labels, kind="stable")
    splits = np.cumsum(np.bincount(labels, minlength=k))[:-1]
    return np.split(order, splits)


@dataclass(frozen=True)
class Ball:
    """Induced ball ``(G, v)_h``; the root is vertex 0 of ``graph``."""

    graph: Graph
    depth: np.ndarray
    original: np.ndarray


def ball(G: Graph, v: int, h: int) -> Ball:
    if not 0 <= v < G.n:
        raise ValueError("vertex out of range")
    if h < 0:
        raise ValueError("radius must be non-negative")
    depth = bfs_depths(G, v, h)
    verts = np.fromiter(depth, dtype=np.int64)
    return Ball(G.subgraph(verts), np.fromiter(depth.values(), dtype=np.int64), verts)


def _ball_is_regular_tree(b: Ball, h: int, q: int) -> bool:
    g = b.graph
    if g.m != g.n - 1:
        return False
    deg = g.degrees()
    inner = b.depth < h
    return bool(np.all(deg[inner] == q + 1))


def tree_ball_test(G: Graph, v: int, h: int, q: int) -> bool:
    """True iff ``(G, v)_h`` is isomorphic to the radius-``h`` ball of the
    infinite ``(q+1)``-regular tree."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return _ball_is_regular_tree(ball(G, v, h), h, q)


@dataclass(frozen=True)
class BallReport:
    h: int
    q: int
    volumes: np.ndarray        # N_h(G, v)
    is_target_ball: np.ndarray  # ball matches the regular-tree ball
    is_tree: np.ndarray         # ball is acyclic

    @property
    def n(self) -> int:
        return self.volumes.size

    @property
    def bad_count(self) -> int:
        """``B(h)``: vertices whose ball differs from the tree ball."""
        return int(np.count_nonzero(~self.is_target_ball))

    @property
    def volume_rms(self) -> float:
        """``M_h(G)``, the quadratic mean of the ball volumes."""
        return float(np.sqrt(np.mean(self.volumes.astype(float) ** 2)))


def _sparse_adjacency(G: Graph):
    from scipy.sparse import csr_matrix

    return csr_matrix((np.ones(G.indices.size, dtype=np.int64), G.indices, G.indptr),
                      shape=(G.n, G.n))


def ball_membership(G: Graph, h: int):
    """Sparse 0/1 matrix whose row ``v`` marks the vertices within distance ``h`` of ``v``."""
    from scipy.sparse import identity

    A = _sparse_adjacency(G)
    R = identity(G.n, dtype=np.int64, format="csr")
    for _ in range(h):
        R = R + R @ A
        R.data[:] = 1
    return R


def ball_volumes(G: Graph, h: int):
    """Ball volumes ``N_h(G, v)`` and whether each induced ball is acyclic."""
    R = ball_membership(G, h)
    A = _sparse_adjacency(G)
    vols = np.asarray(R.sum(axis=1)).ravel()
    edges = np.asarray(R.multiply(R @ A).sum(axis=1)).ravel() // 2
    return vols.astype(np.int64), edges == vols - 1


def ball_report(G: Graph, h: int, q: int) -> BallReport:
    """Ball statistics of every vertex, computed with sparse reachability matrices.

    A ball is the target tree ball iff it is acyclic and every vertex at
    distance below ``h`` has degree ``q + 1`` (such vertices keep all their
    neighbours inside the induced ball).
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    vols, tree = ball_volumes(G, h)
    bad = (G.degrees() != q + 1).astype(np.int64)
    inner = ball_membership(G, h - 1)
    inner_bad = np.asarray(inner @ bad).ravel() > 0
    return BallReport(h, q, vols, tree & ~inner_bad, tree)


def girth(G: Graph) -> float:
    """Length of the shortest cycle, ``math.inf`` for forests."""
    best = np.inf
    indptr, indices = G.indptr, G.indices
    for s in range(G.n):
        dist = {s: 0}
        parent = {s: -1}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in indices[indptr[u]:indptr[u + 1]].tolist():
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return float(best) if np.isinf(best) else int(best)


def girth_radius_bounds(g) -> dict:
    """Two readings of "balls are trees below half the girth".

    ``h_lt_half_girth`` is the largest ``h < g/2``; ``h_induced_tree`` is the
    largest ``h`` for which every induced radius-``h`` ball is acyclic, which
    is ``g // 2 - 1`` (a cycle of length ``k`` enters the induced ball of one
    of its vertices at radius ``k // 2``).  They differ for odd ``g``.
    """
    if np.isinf(g):
        return {"h_lt_half_girth": np.inf, "h_induced_tree": np.inf}
    g = int(g)
    return {"h_lt_half_girth": (g - 1) // 2, "h_induced_tree": g // 2 - 1}
