"""Second smallest normalized-Laplacian eigenvalue of a tree, computed from
Perron values of normalized bottleneck matrices.

A *branch* at ``k`` is a component of ``T - k``; its normalized bottleneck
matrix is the corresponding diagonal block of the inverse of the normalized
Laplacian with row and column ``k`` deleted. "Perron branch" and "Perron
component" mean the same thing here: a branch at ``k`` whose bottleneck
matrix has the largest spectral radius among the branches at ``k``.

Trees split in two kinds. In a Type 1 tree some vertex carries at least two
Perron branches; the Fiedler-type eigenvector vanishes there and
``lambda1 = 1 / rho`` of those branches. Every other tree is Type 2: each
vertex has one Perron branch, and following them leads to an edge ``(i, j)``
whose endpoints point at each other. There ``lambda1`` comes from a scalar
``gamma`` in ``(0, 1)`` balancing two rank-one-shifted bottleneck matrices,
found by bisection.
"""

from __future__ import annotations

import dataclasses
import enum
import functools

import numpy as np

from .errors import NoRoot, NotType1, NotType2, TieAmbiguity
from .linalg import jacobi_eigen, perron, rank_one_downdate, spd_inverse, symmetric
from .tolerances import DEFAULT, Tolerances
from .tree import Branch, BranchSet, Tree, branches_at, rooted_at, shared_path_matrix


@functools.lru_cache(maxsize=1024)
def normalized_laplacian(t: Tree) -> np.ndarray:
    """Unit diagonal, ``-1/sqrt(d_u d_v)`` on edges."""
    d = t.degrees()
    out = np.eye(t.n)
    for u, v in t.edges:
        out[u, v] = out[v, u] = -1.0 / np.sqrt(d[u] * d[v])
    return symmetric(out)


@functools.lru_cache(maxsize=1024)
def combinatorial_laplacian(t: Tree) -> np.ndarray:
    """Degree matrix minus adjacency matrix."""
    out = np.diag(t.degrees())
    for u, v in t.edges:
        out[u, v] = out[v, u] = -1.0
    return symmetric(out)


@dataclasses.dataclass(frozen=True)
class BottleneckMatrix:
    root: int
    vertices: tuple[int, ...]
    anchor: int
    matrix: np.ndarray
    degrees: np.ndarray  # degrees in the whole tree, not the branch

    @property
    def sqrt_degrees(self) -> np.ndarray:
        return np.sqrt(self.degrees)

    @property
    def anchor_index(self) -> int:
        return self.vertices.index(self.anchor)


def _branch_of(t: Tree, k: int, branch: Branch | int) -> Branch:
    if isinstance(branch, Branch):
        return branch
    return branches_at(t, k).branches[branch]


def bottleneck_formula(t: Tree, k: int, branch: Branch | int) -> BottleneckMatrix:
    """Bottleneck matrix from path counts: entry ``(x, y)`` is
    ``sqrt(d_x d_y)`` times the number of edges shared by the paths from
    ``x`` and ``y`` to ``k``. No inversion involved."""
    b = _branch_of(t, k, branch)
    d = t.degrees()[list(b.vertices)]
    m = np.sqrt(np.outer(d, d)) * shared_path_matrix(t, k, b.vertices)
    return BottleneckMatrix(k, b.vertices, b.anchor, symmetric(m), d)


def _deleted_block(full: np.ndarray, k: int, vertices) -> np.ndarray:
    keep = [v for v in range(full.shape[0]) if v != k]
    reduced = full[np.ix_(keep, keep)]
    pos = [keep.index(v) for v in vertices]
    return reduced[np.ix_(pos, pos)]


def bottleneck_oracle(t: Tree, k: int, branch: Branch | int,
                      tol: Tolerances = DEFAULT) -> BottleneckMatrix:
    """Bottleneck matrix by inverting the branch block of the normalized
    Laplacian with vertex ``k`` deleted."""
    b = _branch_of(t, k, branch)
    block = _deleted_block(normalized_laplacian(t), k, b.vertices)
    d = t.degrees()[list(b.vertices)]
    return BottleneckMatrix(k, b.vertices, b.anchor, spd_inverse(block, tol), d)


def laplacian_bottleneck_oracle(t: Tree, k: int, branch: Branch | int,
                                tol: Tolerances = DEFAULT) -> np.ndarray:
    """Inverse of the branch block of the combinatorial Laplacian with ``k``
    deleted; its entries should be plain shared-path edge counts."""
    b = _branch_of(t, k, branch)
    return spd_inverse(_deleted_block(combinatorial_laplacian(t), k, b.vertices), tol)


@dataclasses.dataclass(frozen=True)
class PerronBranches:
    """Perron data of every branch at one vertex."""

    vertex: int
    branch_set: BranchSet
    bottlenecks: tuple[BottleneckMatrix, ...]
    rho: tuple[float, ...]
    vectors: tuple[np.ndarray, ...]
    perron: tuple[int, ...]  # indices of Perron branches

    @property
    def max_rho(self) -> float:
        return max(self.rho)


@functools.lru_cache(maxsize=8192)
def perron_branches_at(t: Tree, v: int, tol: Tolerances = DEFAULT) -> PerronBranches:
    """Spectral radius of each branch's bottleneck matrix at ``v``, and which
    branches attain the maximum within the relative tie band."""
    bs = branches_at(t, v)
    mats, rhos, vecs = [], [], []
    for b in bs.branches:
        bm = bottleneck_formula(t, v, b)
        rho, x = perron(bm.matrix, tol)
        mats.append(bm)
        rhos.append(rho)
        vecs.append(x)
    top = max(rhos)
    tied = tuple(i for i, r in enumerate(rhos) if r >= (1.0 - tol.perron_tie) * top)
    return PerronBranches(v, bs, tuple(mats), tuple(rhos), tuple(vecs), tied)


class Kind(str, enum.Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"


@dataclasses.dataclass(frozen=True)
class Classification:
    kind: Kind
    characteristic: tuple[int, ...]  # (v,) for Type 1, sorted (i, j) for Type 2
    # per characteristic vertex: Perron values of its branches, branch order
    perron_values: tuple[tuple[float, ...], ...]
    walk_trace: tuple[int, ...] = ()

    def same_as(self, other: "Classification") -> bool:
        return self.kind == other.kind and self.characteristic == other.characteristic


def _type2(t: Tree, i: int, j: int, tol: Tolerances, trace=()) -> Classification:
    i, j = sorted((i, j))
    return Classification(
        Kind.TYPE2, (i, j),
        (perron_branches_at(t, i, tol).rho, perron_branches_at(t, j, tol).rho),
        tuple(trace),
    )


def classify(t: Tree, tol: Tolerances = DEFAULT, start: int = 0) -> Classification:
    """Type of ``t`` and its characteristic vertex or edge.

    Walks from ``start`` toward the anchor of the unique Perron branch at
    each vertex. The walk ends at the first vertex with two or more Perron
    branches (Type 1), or when it would step straight back along the edge it
    just used (Type 2, that edge is characteristic).
    """
    trace = [start]
    prev = -1
    cur = start
    for _ in range(t.n + 1):
        pb = perron_branches_at(t, cur, tol)
        if len(pb.perron) >= 2:
            return Classification(Kind.TYPE1, (cur,), (pb.rho,), tuple(trace))
        nxt = pb.branch_set.branches[pb.perron[0]].anchor
        if nxt == prev:
            return _type2(t, cur, prev, tol, trace)
        prev, cur = cur, nxt
        trace.append(cur)
    raise RuntimeError("Perron walk did not terminate")  # unreachable on trees


def classify_exhaustive(t: Tree, tol: Tolerances = DEFAULT) -> Classification:
    """Same answer as :func:`classify`, from the Perron data of every vertex.

    Type 1 iff exactly one vertex has two or more Perron branches; otherwise
    the characteristic edge is the unique edge whose endpoints' Perron
    branches contain each other.
    """
    data = [perron_branches_at(t, v, tol) for v in range(t.n)]
    multi = [pb.vertex for pb in data if len(pb.perron) >= 2]
    if len(multi) > 1:
        raise TieAmbiguity(f"vertices {multi} all show two or more Perron branches")
    if multi:
        v = multi[0]
        return Classification(Kind.TYPE1, (v,), (data[v].rho,))
    points_to = [pb.branch_set.branches[pb.perron[0]].anchor for pb in data]
    mutual = [(u, w) for u, w in t.edges if points_to[u] == w and points_to[w] == u]
    if len(mutual) != 1:
        raise TieAmbiguity(f"expected one mutually Perron edge, found {mutual}")
    return _type2(t, *mutual[0], tol)


@dataclasses.dataclass(frozen=True)
class SpectralReport:
    lambda1: float
    gamma: float | None
    g: np.ndarray
    f: np.ndarray
    residual_inf: float
    orth_residual: float
    oracle_lambda1: float
    classification: Classification
    # Type 2 only: the two balanced spectral radii at gamma
    shifted_rho: tuple[float, float] | None = None
    bisection_steps: int = 0
    oracle_spectrum: np.ndarray | None = dataclasses.field(default=None, repr=False)

    @property
    def fixed_point_gap(self) -> float | None:
        if self.shifted_rho is None:
            return None
        return abs(self.shifted_rho[0] - self.shifted_rho[1])


def harmonic_eigenfunction(t: Tree, g) -> np.ndarray:
    """``f = D^{-1/2} g``."""
    g = np.asarray(g, dtype=float)
    if g.shape != (t.n,):
        raise ValueError(f"expected a vector of length {t.n}")
    return g / np.sqrt(t.degrees())


def _canonical_sign(g: np.ndarray) -> np.ndarray:
    g = g / np.linalg.norm(g)
    # argmax returns the lowest index among exact ties
    if g[np.argmax(np.abs(g))] < 0:
        g = -g
    return g


def oracle_spectrum(t: Tree, tol: Tolerances = DEFAULT) -> np.ndarray:
    """All normalized-Laplacian eigenvalues by Jacobi, ascending."""
    return jacobi_eigen(normalized_laplacian(t), tol).values


def oracle_lambda1(t: Tree, tol: Tolerances = DEFAULT) -> float:
    """Second smallest eigenvalue of the normalized Laplacian, by Jacobi."""
    return float(oracle_spectrum(t, tol)[1])


def _report(t, lam, g, cls, tol, gamma=None, shifted=None, steps=0) -> SpectralReport:
    g = _canonical_sign(g)
    lap = normalized_laplacian(t)
    spectrum = oracle_spectrum(t, tol)
    return SpectralReport(
        lambda1=float(lam),
        gamma=gamma,
        g=g,
        f=harmonic_eigenfunction(t, g),
        residual_inf=float(np.max(np.abs(lap @ g - lam * g))),
        orth_residual=float(abs(np.sqrt(t.degrees()) @ g)),
        oracle_lambda1=float(spectrum[1]),
        classification=cls,
        shifted_rho=shifted,
        bisection_steps=steps,
        oracle_spectrum=spectrum,
    )


def lambda1_type1(t: Tree, v: int, tol: Tolerances = DEFAULT,
                  classification: Classification | None = None) -> SpectralReport:
    """``lambda1 = 1/rho`` of a Perron branch at the characteristic vertex.

    The eigenvector is the Perron vector of one Perron branch minus that of
    another, scaled so their ``sqrt(d)``-weighted sums agree, and zero on
    ``v`` and every other branch.
    """
    pb = perron_branches_at(t, v, tol)
    if len(pb.perron) < 2:
        raise NotType1(f"vertex {v} has a single Perron branch")
    a, b = pb.perron[:2]
    y, z = pb.vectors[a], pb.vectors[b]
    sy = pb.bottlenecks[a].sqrt_degrees @ y
    sz = pb.bottlenecks[b].sqrt_degrees @ z
    g = np.zeros(t.n)
    g[list(pb.bottlenecks[a].vertices)] = y / sy
    g[list(pb.bottlenecks[b].vertices)] = -z / sz
    lam = 1.0 / pb.rho[a]
    if classification is None:
        classification = Classification(Kind.TYPE1, (v,), (pb.rho,))
    return _report(t, lam, g, classification, tol)


def _other_branch_rho(t: Tree, at: int, excluding: int, tol: Tolerances) -> float:
    # largest Perron value among branches at `at` not containing `excluding`;
    # 0 when there is none (`at` is a leaf)
    pb = perron_branches_at(t, at, tol)
    skip = pb.branch_set.containing(excluding)
    others = [r for idx, r in enumerate(pb.rho) if idx != skip]
    return max(others, default=0.0)


def _bottleneck_toward(t: Tree, root: int, other: int) -> BottleneckMatrix:
    bs = branches_at(t, root)
    return bottleneck_formula(t, root, bs.branches[bs.containing(other)])


def lambda1_type2(t: Tree, i: int, j: int, tol: Tolerances = DEFAULT,
                  classification: Classification | None = None) -> SpectralReport:
    """``lambda1`` for a Type 2 tree with characteristic edge ``(i, j)``.

    ``M1`` is the bottleneck matrix at ``j`` of the branch holding ``i`` and
    ``M2`` the one at ``i`` of the branch holding ``j``; ``S = s s^T`` with
    ``s = sqrt(d)``. Bisection finds ``gamma`` where
    ``rho(M1 - gamma S1) == rho(M2 - (1 - gamma) S2)``, and
    ``lambda1 = 1 / rho(M1 - gamma S1)``.

    At ``gamma = 0`` or ``1`` one shifted matrix has zero entries, so the
    bracket signs use the identity that ``M1 - S1`` carries the same spectrum
    (up to zeros) as the bottleneck matrices of the other branches at ``i``.
    """
    m1 = _bottleneck_toward(t, j, i)
    m2 = _bottleneck_toward(t, i, j)
    s1, s2 = m1.sqrt_degrees, m2.sqrt_degrees
    # row of the anchor is sqrt(d_anchor) * s, and every path crosses the
    # edge (i, j), so M >= s s^T entrywise
    assert np.allclose(m1.matrix[m1.anchor_index], np.sqrt(t.degree[i]) * s1)
    assert np.allclose(m2.matrix[m2.anchor_index], np.sqrt(t.degree[j]) * s2)
    assert np.all(m1.matrix >= np.outer(s1, s1) - 1e-12)
    assert np.all(m2.matrix >= np.outer(s2, s2) - 1e-12)

    rho1_full = perron_branches_at(t, j, tol).rho[branches_at(t, j).containing(i)]
    rho2_full = perron_branches_at(t, i, tol).rho[branches_at(t, i).containing(j)]
    h_lo = rho1_full - _other_branch_rho(t, j, i, tol)
    h_hi = _other_branch_rho(t, i, j, tol) - rho2_full
    if not (h_lo > 0.0 > h_hi):
        raise NotType2(f"edge ({i}, {j}) does not bracket a root: h(0)={h_lo}, h(1)={h_hi}")

    lo, hi = 0.0, 1.0
    v1 = v2 = None
    for step in range(1, tol.bisection_max_iter + 1):
        gamma = 0.5 * (lo + hi)
        # warm start from the previous midpoint's Perron vectors
        r1, v1 = perron(rank_one_downdate(m1.matrix, gamma, s1), tol, start=v1)
        r2, v2 = perron(rank_one_downdate(m2.matrix, 1.0 - gamma, s2), tol, start=v2)
        h = r1 - r2
        if abs(h) <= tol.bisection_h:
            break
        if h > 0:
            lo = gamma
        else:
            hi = gamma
        if hi - lo <= tol.bisection_width:
            break
    else:
        raise NoRoot(f"bisection did not settle in {tol.bisection_max_iter} steps")

    g = np.zeros(t.n)
    g[list(m1.vertices)] = -v1 / (s1 @ v1)
    g[list(m2.vertices)] = v2 / (s2 @ v2)
    if classification is None:
        classification = _type2(t, i, j, tol)
    return _report(t, 1.0 / r1, g, classification, tol,
                   gamma=float(gamma), shifted=(r1, r2), steps=step)


def clear_caches() -> None:
    """Drop memoized Laplacians, branch sets and Perron values (for timing)."""
    for fn in (normalized_laplacian, combinatorial_laplacian, perron_branches_at,
               branches_at, rooted_at):
        fn.cache_clear()


def lambda1(t: Tree, tol: Tolerances = DEFAULT) -> SpectralReport:
    """Classify ``t`` and compute ``lambda1`` with the matching route."""
    cls = classify(t, tol)
    if cls.kind is Kind.TYPE1:
        return lambda1_type1(t, cls.characteristic[0], tol, cls)
    return lambda1_type2(t, *cls.characteristic, tol, cls)
