"""Tree representation, edge-list parsing, random generation and the
combinatorial primitives (branches, paths, blocks) the spectral code uses.

Vertices are dense ids ``0..n-1``. External labels (positive integers, as
written in edge-list files) are kept alongside in ``Tree.labels``.
"""

from __future__ import annotations

import dataclasses
import functools
import heapq
from collections import deque
from typing import Iterable, TextIO

import numpy as np

from .errors import (
    ArgumentIsRoot,
    DuplicateEdge,
    Empty,
    HasCycle,
    InvalidSize,
    MalformedLine,
    NotConnected,
    SelfLoop,
    UnknownVertex,
)

Edge = tuple[int, int]


@dataclasses.dataclass(frozen=True)
class Tree:
    """A labeled tree on ``n >= 2`` vertices.

    Build with :meth:`from_edges`, :func:`parse_edge_list` or
    :func:`random_tree`; the constructor validates but does not repair.
    """

    n: int
    edges: tuple[Edge, ...]
    labels: tuple[int, ...]
    adjacency: tuple[tuple[int, ...], ...] = dataclasses.field(compare=False, repr=False)
    degree: tuple[int, ...] = dataclasses.field(compare=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise Empty(f"a tree needs at least 2 vertices, got {self.n}")
        if len(self.edges) != self.n - 1:
            raise HasCycle(f"{len(self.edges)} edges on {self.n} vertices")
        if len(self.labels) != self.n or len(set(self.labels)) != self.n:
            raise ValueError("labels must be n distinct values")
        if any(len(nb) != d for nb, d in zip(self.adjacency, self.degree)):
            raise ValueError("degree does not match adjacency")
        if sum(self.degree) != 2 * (self.n - 1):
            raise ValueError("degree sum must be 2(n-1)")
        seen = _reachable(self.adjacency, 0)
        if len(seen) != self.n:
            raise NotConnected(f"only {len(seen)} of {self.n} vertices reachable from vertex 0")

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], n: int | None = None,
                   labels: Iterable[int] | None = None) -> "Tree":
        """Validate an internal-id edge list and build the tree.

        Edges may be given in any order and orientation. Raises the
        :class:`~perron_tree.errors.TreeError` subclass naming the defect.
        """
        raw = [(int(u), int(v)) for u, v in edges]
        if n is None:
            n = 1 + max((max(e) for e in raw), default=-1)
        if n < 2:
            raise Empty(f"a tree needs at least 2 vertices, got {n}")
        seen_edges: set[Edge] = set()
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in raw:
            if not (0 <= u < n and 0 <= v < n):
                raise UnknownVertex(f"edge ({u}, {v}) outside 0..{n - 1}")
            if u == v:
                raise SelfLoop(f"self loop at vertex {u}")
            e = (min(u, v), max(u, v))
            if e in seen_edges:
                raise DuplicateEdge(f"duplicate edge {e}")
            seen_edges.add(e)
            ru, rv = find(u), find(v)
            if ru == rv:
                raise HasCycle(f"edge {e} closes a cycle")
            parent[ru] = rv
        if len(raw) != n - 1:
            raise NotConnected(f"{len(raw)} edges on {n} vertices")

        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in seen_edges:
            adj[u].append(v)
            adj[v].append(u)
        adjacency = tuple(tuple(sorted(nb)) for nb in adj)
        return cls(
            n=n,
            edges=tuple(sorted(seen_edges)),
            labels=tuple(labels) if labels is not None else tuple(range(1, n + 1)),
            adjacency=adjacency,
            degree=tuple(len(nb) for nb in adjacency),
        )

    @functools.cached_property
    def _id_of_label(self) -> dict[int, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def vertex(self, label: int) -> int:
        """Internal id of an external label."""
        try:
            return self._id_of_label[label]
        except KeyError:
            raise UnknownVertex(f"no vertex labeled {label}") from None

    def label(self, v: int) -> int:
        return self.labels[v]

    def degrees(self) -> np.ndarray:
        return np.asarray(self.degree, dtype=float)

    def to_edge_list(self) -> str:
        """Canonical edge-list text: labels, smaller first, lines sorted."""
        pairs = sorted(tuple(sorted((self.labels[u], self.labels[v]))) for u, v in self.edges)
        return "".join(f"{a} {b}\n" for a, b in pairs)


def _reachable(adjacency, start: int, blocked: int | None = None) -> list[int]:
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if w != blocked and w not in seen:
                seen.add(w)
                order.append(w)
                queue.append(w)
    return order


def parse_edge_list(text: str | TextIO) -> Tree:
    """Parse whitespace-separated label pairs into a :class:`Tree`.

    Blank lines and lines starting with ``#`` are skipped. Labels must be
    positive integers; they are remapped to ids in increasing label order.
    Errors carry the offending line number where one exists.
    """
    if not isinstance(text, str):
        text = text.read()
    pairs: list[tuple[int, int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise MalformedLine(f"expected two labels, got {len(parts)}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedLine(f"labels must be integers: {stripped!r}", lineno) from None
        if a <= 0 or b <= 0:
            raise MalformedLine(f"labels must be positive: {stripped!r}", lineno)
        if a == b:
            raise SelfLoop(f"self loop at label {a}", lineno)
        key = (min(a, b), max(a, b))
        if key in seen:
            raise DuplicateEdge(f"edge {key[0]} {key[1]} repeats line {seen[key]}", lineno)
        seen[key] = lineno
        pairs.append((a, b, lineno))

    labels = sorted({x for a, b, _ in pairs for x in (a, b)})
    if len(labels) < 2:
        raise Empty("fewer than 2 vertices")
    n = len(labels)
    if len(pairs) > n - 1:
        # locate the line that closes the first cycle for the diagnostic
        _first_cycle_line(pairs, labels)
    idx = {lab: i for i, lab in enumerate(labels)}
    try:
        return Tree.from_edges(((idx[a], idx[b]) for a, b, _ in pairs), n=n, labels=labels)
    except HasCycle:
        _first_cycle_line(pairs, labels)
        raise


def _first_cycle_line(pairs, labels):
    parent = {lab: lab for lab in labels}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, lineno in pairs:
        ra, rb = find(a), find(b)
        if ra == rb:
            raise HasCycle(f"edge {a} {b} closes a cycle", lineno)
        parent[ra] = rb
    raise HasCycle(f"{len(pairs)} edges on {len(labels)} vertices")


def prufer_decode(sequence: Iterable[int], n: int) -> list[Edge]:
    """Edges of the labeled tree on ``0..n-1`` encoded by a Prüfer sequence."""
    seq = list(sequence)
    if len(seq) != n - 2:
        raise ValueError(f"Prüfer sequence for n={n} must have length {n - 2}")
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return edges


def random_tree(n: int, seed: int) -> Tree:
    """Uniformly random labeled tree on ``n`` vertices.

    Draws a Prüfer sequence from numpy's PCG64 generator seeded with
    ``seed``, so a given ``(n, seed)`` always yields the same tree.
    """
    if n < 2:
        raise InvalidSize(f"random_tree needs n >= 2, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    seq = rng.integers(0, n, size=n - 2).tolist()
    return Tree.from_edges(prufer_decode(seq, n), n=n)


@dataclasses.dataclass(frozen=True)
class Branch:
    vertices: tuple[int, ...]  # sorted ids
    anchor: int                # the neighbor of the root inside this branch


@dataclasses.dataclass(frozen=True)
class BranchSet:
    """Connected components of ``T - root``, ordered by anchor id."""

    root: int
    branches: tuple[Branch, ...]
    component: tuple[int, ...]  # branch index per vertex, -1 for the root

    def containing(self, v: int) -> int:
        """Index of the branch holding vertex ``v``."""
        c = self.component[v]
        if c < 0:
            raise ArgumentIsRoot(f"vertex {v} is the root")
        return c


def _check_vertex(t: Tree, *vs: int) -> None:
    for v in vs:
        if not 0 <= v < t.n:
            raise UnknownVertex(f"vertex {v} outside 0..{t.n - 1}")


@functools.lru_cache(maxsize=4096)
def branches_at(t: Tree, k: int) -> BranchSet:
    """Branches of ``t`` at ``k``: one per neighbor of ``k``, in sorted
    neighbor order."""
    _check_vertex(t, k)
    component = [-1] * t.n
    branches = []
    for idx, a in enumerate(t.adjacency[k]):
        members = _reachable(t.adjacency, a, blocked=k)
        for v in members:
            component[v] = idx
        branches.append(Branch(tuple(sorted(members)), a))
    return BranchSet(k, tuple(branches), tuple(component))


@dataclasses.dataclass(frozen=True)
class Rooted:
    root: int
    parent: tuple[int, ...]  # -1 at the root
    depth: tuple[int, ...]


@functools.lru_cache(maxsize=4096)
def rooted_at(t: Tree, k: int) -> Rooted:
    _check_vertex(t, k)
    parent = [-1] * t.n
    depth = [0] * t.n
    seen = [False] * t.n
    seen[k] = True
    queue = deque([k])
    while queue:
        u = queue.popleft()
        for w in t.adjacency[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                depth[w] = depth[u] + 1
                queue.append(w)
    return Rooted(k, tuple(parent), tuple(depth))


def path_edges(t: Tree, i: int, j: int) -> frozenset[Edge]:
    """Edge set of the unique ``i``–``j`` path, edges as ``(min, max)``."""
    _check_vertex(t, i, j)
    parent = rooted_at(t, i).parent
    out = set()
    v = j
    while v != i:
        p = parent[v]
        out.add((min(p, v), max(p, v)))
        v = p
    return frozenset(out)


def shared_path_count(t: Tree, i: int, j: int, k: int) -> int:
    """Number of edges common to the paths ``i -> k`` and ``j -> k``.

    With the tree rooted at ``k`` this is the depth of the vertex where
    the two upward paths meet.
    """
    _check_vertex(t, i, j, k)
    if i == k or j == k:
        raise ArgumentIsRoot(f"arguments must differ from the root {k}")
    r = rooted_at(t, k)
    a, b = i, j
    while r.depth[a] > r.depth[b]:
        a = r.parent[a]
    while r.depth[b] > r.depth[a]:
        b = r.parent[b]
    while a != b:
        a, b = r.parent[a], r.parent[b]
    return r.depth[a]


def shared_path_matrix(t: Tree, k: int, vertices: Iterable[int]) -> np.ndarray:
    """Matrix of :func:`shared_path_count` over ``vertices`` (all != k).

    Computed in bulk as ``B @ B.T`` where ``B[i, x] = 1`` when ``x`` lies on
    the path from ``i`` up to ``k`` (the edge above ``x`` is shared by every
    pair of its descendants).
    """
    verts = list(vertices)
    parent = rooted_at(t, k).parent
    m = len(verts)
    ind = np.zeros((m, t.n))
    for p, v in enumerate(verts):
        if v == k:
            raise ArgumentIsRoot(f"vertex {v} is the root")
        x = v
        while x != k:
            ind[p, x] = 1.0
            x = parent[x]
    return ind @ ind.T


@dataclasses.dataclass(frozen=True)
class BlockDecomposition:
    articulation_points: frozenset[int]
    blocks: tuple[frozenset[int], ...]  # sorted by smallest member


def biconnected_components(n: int, adjacency) -> tuple[set[int], list[set[int]]]:
    """Articulation points and vertex sets of blocks of a simple graph.

    Iterative Hopcroft–Tarjan low-point traversal with an edge stack; works
    on any graph, not only trees. Isolated vertices form no block.
    """
    disc = [-1] * n
    low = [0] * n
    articulation: set[int] = set()
    blocks: list[set[int]] = []
    timer = 0
    for start in range(n):
        if disc[start] != -1:
            continue
        disc[start] = low[start] = timer
        timer += 1
        root_children = 0
        edge_stack: list[Edge] = []
        stack = [(start, -1, iter(adjacency[start]))]
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    edge_stack.append((u, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    if u == start:
                        root_children += 1
                    stack.append((w, u, iter(adjacency[w])))
                    advanced = True
                    break
                if w != parent and disc[w] < disc[u]:
                    edge_stack.append((u, w))
                    low[u] = min(low[u], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent == -1:
                continue
            low[parent] = min(low[parent], low[u])
            if low[u] >= disc[parent]:
                if parent != start:
                    articulation.add(parent)
                block = set()
                while True:
                    a, b = edge_stack.pop()
                    block.update((a, b))
                    if (a, b) == (parent, u):
                        break
                blocks.append(block)
        if root_children >= 2:
            articulation.add(start)
    return articulation, blocks


def block_decomposition(t: Tree) -> BlockDecomposition:
    """Blocks and articulation points of ``t``.

    For a tree every edge is a block and every vertex of degree >= 2 is an
    articulation point; the general traversal must reproduce that exactly.
    """
    art, blocks = biconnected_components(t.n, t.adjacency)
    expected = {v for v in range(t.n) if t.degree[v] >= 2}
    if art != expected or any(len(b) != 2 for b in blocks) or len(blocks) != t.n - 1:
        raise AssertionError("block decomposition of a tree disagrees with the degree rule")
    return BlockDecomposition(
        frozenset(art), tuple(sorted((frozenset(b) for b in blocks), key=lambda b: sorted(b)))
    )
