"""Dense symmetric linear algebra.

Matrices are plain ``numpy`` arrays; :func:`symmetric` is the single entry
point that turns an arbitrary square array into an exactly symmetric,
read-only one. Nothing here knows about trees.
"""

from __future__ import annotations

import dataclasses
import functools

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotPositiveDefinite,
    NotPositiveMatrix,
)
from .tolerances import DEFAULT, Tolerances


def symmetric(a) -> np.ndarray:
    """Copy of ``a`` with the upper triangle mirrored from the lower one.

    The result is read-only so it can be shared freely.
    """
    out = np.array(a, dtype=float)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix has non-finite entries")
    iu = _upper_indices(out.shape[0])
    out[iu] = out.T[iu]
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def _upper_indices(m: int):
    return np.triu_indices(m, 1)


@dataclasses.dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray   # ascending
    vectors: np.ndarray  # column i pairs with values[i]


@functools.lru_cache(maxsize=None)
def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # circle-method tournament: every pair (p, q) appears exactly once per
    # sweep, and the pairs inside one round are disjoint
    players = list(range(m + (m % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for k in range(size // 2):
            p, q = players[k], players[size - 1 - k]
            if p < m and q < m:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def jacobi_eigen(a, tol: Tolerances = DEFAULT) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that the disjoint rotations of one round are applied together. Stops
    when the off-diagonal Frobenius norm drops to ``tol.eig * ||A||_F``.
    Equal eigenvalues keep their original column order.
    """
    A = np.array(symmetric(a))
    m = A.shape[0]
    V = np.eye(m)
    norm = np.linalg.norm(A)
    if m == 1 or norm == 0.0:
        return EigenDecomposition(np.diag(A).copy(), V)
    rounds = _round_robin(m)
    for _ in range(tol.eig_max_sweeps):
        if _off_norm(A) <= tol.eig * norm:
            break
        for p, q in rounds:
            apq = A[p, q]
            live = apq != 0.0
            if not np.any(live):
                continue
            p, q, apq = p[live], q[live], apq[live]
            # tiny apq sends tau to inf, where t -> 0 is the right limit
            with np.errstate(over="ignore"):
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # all rotations of a round act on disjoint planes: one matrix J
            J = np.eye(m)
            J[p, p] = c
            J[q, q] = c
            J[p, q] = s
            J[q, p] = -s
            A = J.T @ A @ J
            A[p, q] = 0.0
            A[q, p] = 0.0
            V = V @ J
    else:
        if _off_norm(A) > tol.eig * norm:
            raise NoConvergence(f"Jacobi did not converge in {tol.eig_max_sweeps} sweeps")
    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], V[:, order])


def cholesky(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == a``; every pivot ``L[j, j]**2``
    must exceed ``tol.cholesky_pivot``."""
    a = symmetric(a)
    try:
        L = scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(L) ** 2
    if np.any(pivots <= tol.cholesky_pivot):
        j = int(np.argmin(pivots))
        raise NotPositiveDefinite(f"pivot {pivots[j]:.3e} at row {j}")
    return L


def spd_inverse(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via Cholesky."""
    L = cholesky(a, tol)
    Linv = scipy.linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True, check_finite=False)
    return symmetric(Linv.T @ Linv)


def perron(a, tol: Tolerances = DEFAULT, start=None) -> tuple[float, np.ndarray]:
    """Spectral radius and unit Perron vector of an entrywise positive
    symmetric matrix, by power iteration from the uniform vector (or from
    the positive vector ``start``, when warm-starting a nearby matrix).

    Iterates until successive Rayleigh quotients agree to
    ``tol.perron * max(1, rho)`` and the residual ``||Ax - rho x||_inf`` is
    at most ``tol.perron_residual * rho``; the second test is what makes
    the returned vector accurate, not just the value.
    """
    a = symmetric(a)
    if np.any(a <= 0.0):
        raise NotPositiveMatrix("perron() needs every entry strictly positive")
    m = a.shape[0]
    if m == 1:
        return float(a[0, 0]), np.ones(1)
    if start is None:
        x = np.full(m, 1.0 / np.sqrt(m))
    else:
        x = np.asarray(start, dtype=float)
        x = x / np.sqrt(x @ x)
    y = a @ x
    rho = float(x @ y)
    for _ in range(tol.perron_max_iter):
        x = y / np.sqrt(y @ y)
        y = a @ x
        rho_next = float(x @ y)
        settled = abs(rho_next - rho) <= tol.perron * max(1.0, rho_next)
        rho = rho_next
        if settled and np.max(np.abs(y - rho * x)) <= tol.perron_residual * rho:
            return rho, x
    raise NoConvergence(f"power iteration did not converge in {tol.perron_max_iter} steps")


def rank_one_downdate(a, c: float, w) -> np.ndarray:
    """``a - c * w w^T``, exactly symmetric."""
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    if a.ndim != 2 or a.shape != (w.shape[0], w.shape[0]):
        raise DimensionMismatch(f"matrix {a.shape} vs vector {w.shape}")
    return symmetric(a - c * np.outer(w, w))
