import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from npdg.errors import NonFiniteMatrixError
from npdg.linalg import frobenius_norm, matrix_exponential, solve_lyapunov, spectral_norm

from conftest import random_hurwitz

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def small_matrices():
    shapes = st.tuples(st.integers(1, 6), st.integers(1, 6))
    return shapes.flatmap(lambda s: arrays(np.float64, s, elements=finite_floats))


class TestSpectralNorm:
    def test_scalar(self):
        assert spectral_norm([[-3.5]]) == 3.5

    def test_diagonal(self):
        assert spectral_norm(np.diag([1.0, -4.0, 2.0])) == pytest.approx(4.0, abs=1e-12)

    def test_zero(self):
        assert spectral_norm(np.zeros((3, 2))) == 0.0

    def test_ones_orthogonal_start(self):
        # top singular vector is orthogonal to the all-ones start vector
        m = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert spectral_norm(m) == pytest.approx(2.0, abs=1e-10)

    def test_against_svd(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            m = rng.normal(size=(rng.integers(1, 9), rng.integers(1, 9)))
            expected = np.linalg.norm(m, 2)
            assert spectral_norm(m) == pytest.approx(expected, abs=1e-10 * (1 + expected))

    def test_clustered_spectrum(self):
        # nearly equal singular values are the slow case for plain power steps
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        m = q @ np.diag([1.0, 1.0 - 1e-9, 0.9, 0.5, 0.1, 0.01]) @ q.T
        assert spectral_norm(m) == pytest.approx(1.0, abs=1e-9)

    def test_never_exceeds_frobenius(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            m = rng.normal(size=(rng.integers(1, 7), rng.integers(1, 7)))
            assert spectral_norm(m) <= frobenius_norm(m)

    def test_non_finite_raises(self):
        with pytest.raises(NonFiniteMatrixError):
            spectral_norm([[np.nan]])

    @settings(max_examples=40, deadline=None)
    @given(small_matrices())
    def test_frobenius_dominates(self, m):
        assert spectral_norm(m) <= frobenius_norm(m) + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(small_matrices(), st.floats(min_value=0.01, max_value=100.0))
    def test_homogeneous(self, m, c):
        s = spectral_norm(m)
        assert spectral_norm(c * m) == pytest.approx(c * s, rel=1e-9, abs=1e-9)


class TestMatrixExponential:
    def test_zero_matrix(self):
        assert np.array_equal(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        e = matrix_exponential(np.diag([-1.0, 2.0]))
        assert np.allclose(e, np.diag([np.exp(-1.0), np.exp(2.0)]), rtol=1e-13)

    def test_nilpotent(self):
        e = matrix_exponential(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert np.allclose(e, np.array([[1.0, 1.0], [0.0, 1.0]]), atol=1e-14)

    def test_against_scipy(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            m = rng.normal(size=(n, n)) * rng.uniform(0.05, 8.0)
            ours = matrix_exponential(m)
            ref = sla.expm(m)
            assert np.allclose(ours, ref, rtol=1e-11, atol=1e-11 * np.max(np.abs(ref)))

    def test_large_norm(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(4, 4))
        m *= 50.0 / spectral_norm(m)
        ref = sla.expm(m)
        assert np.allclose(matrix_exponential(m), ref, rtol=1e-10)

    def test_semigroup(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            m = rng.normal(size=(n, n))
            m *= rng.uniform(0.1, 5.0) / max(spectral_norm(m), 1e-12)
            s, t = rng.uniform(0.1, 1.0, size=2)
            whole = matrix_exponential(m * (s + t))
            split = matrix_exponential(m * s) @ matrix_exponential(m * t)
            assert np.max(np.abs(whole - split)) <= 1e-10 * max(1.0, np.max(np.abs(whole)))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            matrix_exponential(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(NonFiniteMatrixError):
            matrix_exponential(np.array([[np.inf]]))


class TestLyapunov:
    def test_residual_small(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            f = random_hurwitz(rng, n)
            w = rng.normal(size=(n, n))
            w = w @ w.T
            x = solve_lyapunov(f, w)
            res = f.T @ x + x @ f + w
            assert np.max(np.abs(res)) <= 1e-9 * (1 + np.max(np.abs(w)))
            assert np.allclose(x, x.T)

    def test_against_scipy(self):
        rng = np.random.default_rng(9)
        f = random_hurwitz(rng, 5)
        w = rng.normal(size=(5, 5))
        w = 0.5 * (w + w.T)
        ours = solve_lyapunov(f, w)
        ref = sla.solve_continuous_lyapunov(f.T, -w)
        assert np.allclose(ours, ref, rtol=1e-9, atol=1e-9)
