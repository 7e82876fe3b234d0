import math

import numpy as np
import pytest

from bsdpi import (
    DimMismatch,
    DomainViolation,
    NoConvergence,
    NotHermitian,
    herm_eig,
    hs_inner,
    integrate_adaptive,
    matrix_fn,
    pinv,
    schatten_norm,
)
from bsdpi.linalg import EXP, IDENTITY, LOG, SQRT, SQUARE, ScalarFunction


def rand_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def rand_psd(dim, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return g @ g.conj().T


def expm_series(a, terms=60):
    """Independent matrix exponential by plain power series."""
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


class TestHermEig:
    def test_already_diagonal(self):
        e = herm_eig(np.diag([1.0, 2.0]))
        assert np.allclose(e.values, [1.0, 2.0])
        assert np.allclose(np.abs(e.vectors), np.eye(2))

    def test_pauli_x_spectrum(self):
        e = herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(e.values, [-1.0, 1.0])

    def test_random_reconstruction(self):
        for seed in range(100):
            d = 2 + seed % 7
            a = rand_hermitian(d, seed)
            e = herm_eig(a)
            scale = max(1.0, np.linalg.norm(a))
            assert np.linalg.norm(e.reconstruct() - a) <= 1e-10 * scale
            assert np.linalg.norm(e.vectors.conj().T @ e.vectors - np.eye(d)) <= 1e-10
            assert np.all(np.diff(e.values) >= 0)

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_not_square(self):
        with pytest.raises(DimMismatch):
            herm_eig(np.zeros((2, 3)))


class TestMatrixFn:
    def test_identity(self):
        a = rand_psd(4, 0)
        assert np.allclose(matrix_fn(a, IDENTITY), a)

    def test_sqrt_diagonal(self):
        out = matrix_fn(np.diag([4.0, 9.0]), SQRT)
        assert np.allclose(out, np.diag([2.0, 3.0]))

    def test_log_exp_round_trip(self):
        for seed in range(5):
            b = rand_hermitian(3, seed) * 0.7
            a = expm_series(b)
            assert np.linalg.norm(matrix_fn(a, LOG) - b) <= 1e-9

    def test_homomorphism_sqrt_square(self):
        for seed in range(20):
            a = rand_psd(4, seed)
            direct = matrix_fn(a, ScalarFunction(lambda x: np.sqrt(np.square(x)), lo=0.0, at_zero=0.0))
            chained = matrix_fn(matrix_fn(a, SQUARE), SQRT)
            assert np.linalg.norm(direct - chained) <= 1e-9 * max(1.0, np.linalg.norm(a))

    def test_plain_callable(self):
        a = rand_hermitian(3, 11)
        assert np.allclose(matrix_fn(a, EXP), expm_series(a), atol=1e-9)

    def test_log_of_singular_raises(self):
        with pytest.raises(DomainViolation):
            matrix_fn(np.diag([1.0, 0.0]), LOG)

    def test_negative_clipping(self):
        a = np.diag([1.0, -1e-15])
        out = matrix_fn(a, SQRT)
        assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


class TestPinv:
    def test_diagonal(self):
        assert np.allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_invertible_residual(self):
        for seed in range(10):
            a = rand_psd(4, seed) + 0.5 * np.eye(4)
            assert np.linalg.norm(a @ pinv(a) - np.eye(4)) < 1e-9

    def test_rank_one_projector(self):
        v = np.array([1.0, 1j]) / math.sqrt(2)
        p = np.outer(v, v.conj())
        assert np.linalg.norm(pinv(p) - p) < 1e-12

    def test_support_projector_product(self):
        a = np.diag([3.0, 1.0, 0.0])
        assert np.allclose(a @ pinv(a), np.diag([1.0, 1.0, 0.0]), atol=1e-9)

    def test_double_pinv_on_support(self):
        for seed in range(10):
            a = rand_psd(3, seed)
            a[2, :] = 0.0
            a[:, 2] = 0.0
            assert np.linalg.norm(pinv(pinv(a)) - a) <= 1e-9 * max(1.0, np.linalg.norm(a))

    def test_zero_matrix(self):
        assert np.allclose(pinv(np.zeros((3, 3))), np.zeros((3, 3)))


class TestNorms:
    def test_schatten_values(self):
        a = np.diag([3.0, -4.0])
        assert schatten_norm(a, 1) == pytest.approx(7.0, abs=1e-12)
        assert schatten_norm(a, 2) == pytest.approx(5.0, abs=1e-12)
        assert schatten_norm(a, np.inf) == pytest.approx(4.0, abs=1e-12)

    def test_frobenius_matches_inner(self):
        for seed in range(10):
            a = rand_hermitian(5, seed)
            n2 = schatten_norm(a, 2)
            inner = hs_inner(a, a).real
            assert abs(n2 * n2 - inner) <= 1e-12 * max(1.0, inner)

    def test_bad_p(self):
        with pytest.raises(ValueError):
            schatten_norm(np.eye(2), 3)


class TestHsInner:
    def test_identity(self):
        assert hs_inner(np.eye(2), np.eye(2)) == pytest.approx(2.0)

    def test_pauli_orthogonality(self):
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        z = np.diag([1.0, -1.0])
        assert abs(hs_inner(x, z)) < 1e-15

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            hs_inner(np.eye(2), np.eye(3))


class TestIntegrateAdaptive:
    def test_constant(self):
        assert integrate_adaptive(lambda t: 1.0, 0.0, 1.0, 1e-12) == pytest.approx(1.0)

    def test_linear(self):
        assert integrate_adaptive(lambda t: t, 0.0, 2.0, 1e-12) == pytest.approx(2.0)

    def test_long_tail_closed_form(self):
        g = lambda t: 1.0 / (1.0 + t) - 1.0 / (t + math.e)
        exact = 1.0 + math.log((1e6 + 1.0) / (1e6 + math.e))
        assert integrate_adaptive(g, 0.0, 1e6, 1e-9) == pytest.approx(exact, abs=1e-8)

    def test_panel_cap(self):
        with pytest.raises(NoConvergence):
            integrate_adaptive(lambda t: math.sin(1e4 * t), 0.0, 1.0, 1e-14, max_panels=4)

    def test_reversed_bounds(self):
        assert integrate_adaptive(lambda t: t, 2.0, 0.0, 1e-12) == pytest.approx(-2.0)
