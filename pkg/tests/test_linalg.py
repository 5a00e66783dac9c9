import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from perron_tree import errors
from perron_tree.linalg import (
    cholesky,
    jacobi_eigen,
    perron,
    rank_one_downdate,
    spd_inverse,
    symmetric,
)
from perron_tree.spectral import normalized_laplacian

from .conftest import path

R2 = np.sqrt(2.0)
R3 = np.sqrt(3.0)

sym_matrices = st.integers(1, 12).flatmap(
    lambda m: arrays(float, (m, m), elements=st.floats(-10, 10, allow_nan=False, width=64))
).map(lambda a: (a + a.T) / 2)


def random_spd(rng, m):
    a = rng.standard_normal((m, m))
    return a @ a.T + m * np.eye(m)


class TestSymmetric:
    def test_read_only_and_exact(self):
        a = symmetric([[1.0, 2.0], [2.0 + 1e-15, 3.0]])
        assert np.array_equal(a, a.T)
        with pytest.raises(ValueError):
            a[0, 0] = 5.0

    def test_not_square(self):
        with pytest.raises(errors.DimensionMismatch):
            symmetric(np.ones((2, 3)))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            symmetric([[np.nan]])


class TestJacobi:
    def test_p2(self):
        assert np.allclose(jacobi_eigen([[1, -1], [-1, 1]]).values, [0, 2], atol=1e-14)

    def test_identity(self):
        e = jacobi_eigen(np.eye(3))
        assert np.array_equal(e.values, [1, 1, 1])
        assert np.array_equal(e.vectors, np.eye(3))

    def test_p4(self):
        vals = jacobi_eigen(normalized_laplacian(path(4))).values
        assert np.allclose(vals, [0, 0.5, 1.5, 2], atol=1e-12)

    def test_paths_closed_form(self):
        for n in range(2, 25):
            vals = jacobi_eigen(normalized_laplacian(path(n))).values
            expected = np.sort(1 - np.cos(np.pi * np.arange(n) / (n - 1)))
            assert np.allclose(vals, expected, atol=1e-12)

    def test_zero_and_scalar(self):
        assert np.array_equal(jacobi_eigen(np.zeros((3, 3))).values, np.zeros(3))
        assert jacobi_eigen([[4.0]]).values[0] == 4.0

    def test_no_convergence(self):
        a = np.random.default_rng(0).standard_normal((8, 8))
        from perron_tree.tolerances import DEFAULT
        with pytest.raises(errors.NoConvergence):
            jacobi_eigen(a + a.T, DEFAULT.replace(eig_max_sweeps=1))

    @settings(max_examples=80, deadline=None)
    @given(sym_matrices)
    def test_matches_eigh(self, a):
        e = jacobi_eigen(a)
        scale = max(1.0, np.abs(a).max())
        assert np.allclose(e.values, np.linalg.eigvalsh(a), atol=1e-10 * scale)
        m = a.shape[0]
        assert np.abs(e.vectors.T @ e.vectors - np.eye(m)).max() <= 1e-10
        recon = e.vectors @ np.diag(e.values) @ e.vectors.T
        assert np.abs(recon - a).max() <= 1e-10 * scale
        assert np.all(np.diff(e.values) >= 0)


class TestInverse:
    def test_examples(self):
        assert np.allclose(spd_inverse([[2.0]]), [[0.5]])
        assert np.allclose(spd_inverse(np.eye(4)), np.eye(4))

    def test_p4_branch_block(self):
        # rows/cols of vertices 1, 2 of the normalized Laplacian of P4
        lap = normalized_laplacian(path(4))
        inv = spd_inverse(lap[:2, :2])
        assert np.allclose(inv, [[2, R2], [R2, 2]], atol=1e-12)

    def test_not_positive_definite(self):
        with pytest.raises(errors.NotPositiveDefinite):
            cholesky([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(errors.NotPositiveDefinite):
            cholesky([[1e-14]])

    @pytest.mark.parametrize("m", [1, 2, 5, 17, 40])
    def test_random(self, m):
        rng = np.random.default_rng(m)
        a = random_spd(rng, m)
        inv = spd_inverse(a)
        assert np.abs(a @ inv - np.eye(m)).max() <= 1e-9
        assert np.allclose(spd_inverse(inv), a, rtol=1e-9, atol=1e-9)
        L = cholesky(a)
        assert np.allclose(L @ L.T, a)
        assert np.allclose(L, np.tril(L))


class TestPerron:
    def test_scalar(self):
        rho, v = perron([[3.5]])
        assert rho == 3.5 and np.array_equal(v, [1.0])

    def test_two_by_two(self):
        rho, v = perron([[2, R2], [R2, 2]])
        assert abs(rho - (2 + R2)) <= 1e-12
        assert np.allclose(v, [1 / R2, 1 / R2])

    def test_three_by_three(self):
        rho, v = perron([[3, R3, R3], [R3, 2, 1], [R3, 1, 2]])
        assert abs(rho - (3 + np.sqrt(6))) <= 1e-12
        assert np.all(v > 0) and abs(np.linalg.norm(v) - 1) <= 1e-14

    def test_rejects_nonpositive(self):
        with pytest.raises(errors.NotPositiveMatrix):
            perron([[1.0, 0.0], [0.0, 1.0]])

    def test_warm_start_agrees(self):
        a = np.array([[3, R3, R3], [R3, 2, 1], [R3, 1, 2]])
        rho, v = perron(a)
        rho2, v2 = perron(a + 1e-3, start=v)
        rho3, v3 = perron(a + 1e-3)
        assert abs(rho2 - rho3) <= 1e-12 and np.allclose(v2, v3, atol=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 15).flatmap(
        lambda m: arrays(float, (m, m), elements=st.floats(0.01, 10, width=64))))
    def test_matches_jacobi(self, a):
        a = (a + a.T) / 2
        rho, v = perron(a)
        e = jacobi_eigen(a)
        assert abs(rho - e.values[-1]) <= 1e-10 * max(1.0, rho)
        assert np.all(v > 0)
        assert np.abs(a @ v - rho * v).max() <= 1e-10 * rho


class TestDowndate:
    def test_zero_coefficient(self):
        a = np.array([[2.0, 1.0], [1.0, 3.0]])
        assert np.array_equal(rank_one_downdate(a, 0.0, [1, 1]), a)

    def test_all_ones(self):
        assert np.array_equal(rank_one_downdate(np.ones((2, 2)), 1.0, [1, 1]), np.zeros((2, 2)))

    def test_p4_shifted(self):
        m1 = np.array([[2, R2], [R2, 2]])
        out = rank_one_downdate(m1, 0.5, [1, R2])
        assert np.allclose(out, [[1.5, R2 / 2], [R2 / 2, 1]])
        assert abs(perron(out)[0] - 2.0) <= 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(errors.DimensionMismatch):
            rank_one_downdate(np.eye(2), 1.0, [1, 2, 3])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 10_000), st.floats(0, 1), st.floats(0, 1))
    def test_spectral_radius_monotone(self, m, seed, c1, c2):
        rng = np.random.default_rng(seed)
        w = rng.uniform(0.1, 1.0, m)
        a = np.outer(w, w) + np.diag(rng.uniform(0.1, 1, m)) + 0.01
        lo, hi = sorted((c1, c2))
        # subtracting more of a PSD rank-one term never raises the top eigenvalue
        top = lambda c: np.linalg.eigvalsh(rank_one_downdate(a, c, w))[-1]
        assert top(hi) <= top(lo) + 1e-12
