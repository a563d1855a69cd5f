"""Dense symmetric eigen helpers: oracles, conventions, and failure modes."""

import numpy as np
import numpy.testing as npt
import pytest

from mvconsensus.errors import (
    CholeskyError,
    DimensionMismatchError,
    DimensionTooLargeError,
    NonFiniteError,
    NonSquareError,
    NonSymmetricError,
)
from mvconsensus.linalg import (
    PencilSolver,
    gen_eig_extreme,
    gram,
    sym_eig,
    trace_form,
)

from conftest import random_spd, random_sym


class TestSymEig:
    def test_diagonal_matrix_sorted_ascending(self):
        res = sym_eig(np.diag([3.0, 1.0, 2.0]))
        npt.assert_allclose(res.eigenvalues, [1.0, 2.0, 3.0], atol=1e-12)
        # eigenvectors are signed unit columns; the sign rule makes them +1
        expected = np.zeros((3, 3))
        expected[1, 0] = expected[2, 1] = expected[0, 2] = 1.0
        npt.assert_allclose(res.eigenvectors, expected, atol=1e-12)

    def test_identity_degenerate_spectrum(self):
        res = sym_eig(np.eye(4))
        npt.assert_allclose(res.eigenvalues, np.ones(4), atol=1e-12)
        # degenerate spectrum: only the residual is pinned down
        recon = res.eigenvectors @ np.diag(res.eigenvalues) @ res.eigenvectors.T
        npt.assert_allclose(recon, np.eye(4), atol=1e-10)

    @pytest.mark.parametrize("seed", range(8))
    def test_reconstruction_and_residual(self, seed):
        a = random_sym(6, seed)
        res = sym_eig(a)
        norm = np.linalg.norm(a)
        recon = res.eigenvectors @ np.diag(res.eigenvalues) @ res.eigenvectors.T
        assert np.linalg.norm(a - recon) <= 1e-8 * norm
        for i in range(6):
            v = res.eigenvectors[:, i]
            assert np.linalg.norm(a @ v - res.eigenvalues[i] * v) <= 1e-8 * norm

    @pytest.mark.parametrize("seed", range(8))
    def test_orthonormal_columns_and_order(self, seed):
        res = sym_eig(random_sym(7, seed + 100))
        vtv = res.eigenvectors.T @ res.eigenvectors
        assert np.linalg.norm(vtv - np.eye(7)) <= 1e-10 * 7
        assert np.all(np.diff(res.eigenvalues) >= -1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_sign_convention_first_nonzero_positive(self, seed):
        res = sym_eig(random_sym(5, seed + 200))
        for i in range(5):
            v = res.eigenvectors[:, i]
            lead = v[np.abs(v) > 1e-12 * np.abs(v).max()][0]
            assert lead > 0

    def test_rejects_non_square(self):
        with pytest.raises(NonSquareError):
            sym_eig(np.zeros((2, 3)))

    def test_rejects_non_symmetric(self):
        with pytest.raises(NonSymmetricError):
            sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_finite(self):
        bad = np.eye(3)
        bad[0, 0] = np.nan
        with pytest.raises(NonFiniteError):
            sym_eig(bad)


class TestGenEigExtreme:
    def test_identity_constraint_reduces_to_sym_eig(self):
        res = gen_eig_extreme(np.diag([1.0, 2.0, 3.0]), np.eye(3), 2, side="smallest")
        npt.assert_allclose(res.eigenvalues, [1.0, 2.0], atol=1e-12)
        npt.assert_allclose(np.abs(res.eigenvectors), np.eye(3)[:, :2], atol=1e-10)

    def test_scalar_pencil(self):
        res = gen_eig_extreme(np.array([[2.0]]), np.array([[2.0]]), 1, side="smallest")
        npt.assert_allclose(res.eigenvalues, [1.0], atol=1e-12)
        # C-orthonormality pins the vector to 1/sqrt(2)
        npt.assert_allclose(res.eigenvectors, [[1.0 / np.sqrt(2.0)]], atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("side", ["smallest", "largest"])
    def test_whitening_oracle(self, seed, side):
        # independent route: eigendecompose C^{-1/2} A C^{-1/2}, map back
        a = random_sym(5, seed)
        c = random_spd(5, seed + 1000)
        d = 3
        res = gen_eig_extreme(a, c, d, side=side)

        w, u = np.linalg.eigh(c)
        c_isqrt = u @ np.diag(w**-0.5) @ u.T
        inner = np.linalg.eigvalsh(c_isqrt @ a @ c_isqrt)
        expected = inner[:d] if side == "smallest" else inner[-d:]
        npt.assert_allclose(np.sort(res.eigenvalues), np.sort(expected), atol=1e-8)
        for i in range(d):
            v = res.eigenvectors[:, i]
            eta = res.eigenvalues[i]
            assert np.linalg.norm(a @ v - eta * (c @ v)) <= 1e-8 * (1 + np.linalg.norm(a))

    @pytest.mark.parametrize("seed", range(10))
    def test_constraint_orthonormality(self, seed):
        a = random_sym(6, seed + 50)
        c = random_spd(6, seed + 51)
        res = gen_eig_extreme(a, c, 4, side="smallest")
        vcv = res.eigenvectors.T @ c @ res.eigenvectors
        assert np.linalg.norm(vcv - np.eye(4)) <= 1e-8

    def test_eigenvalues_ascending_both_sides(self):
        a = random_sym(6, 7)
        c = random_spd(6, 8)
        for side in ("smallest", "largest"):
            res = gen_eig_extreme(a, c, 3, side=side)
            assert np.all(np.diff(res.eigenvalues) >= -1e-12)

    def test_dimension_too_large(self):
        with pytest.raises(DimensionTooLargeError):
            gen_eig_extreme(np.eye(3), np.eye(3), 4, side="smallest")

    def test_cholesky_failure_on_negative_definite(self):
        with pytest.raises(CholeskyError):
            gen_eig_extreme(np.eye(3), -np.eye(3), 1, side="smallest")

    def test_ridge_ladder_rescues_singular_psd(self):
        # C singular PSD: ridge fallback must produce finite output
        c = np.diag([1.0, 1.0, 0.0])
        res = gen_eig_extreme(random_sym(3, 3), c, 2, side="smallest")
        assert np.all(np.isfinite(res.eigenvectors))
        assert np.all(np.isfinite(res.eigenvalues))

    def test_pencil_solver_factors_once_and_matches(self):
        a = random_sym(5, 21)
        c = random_spd(5, 22)
        solver = PencilSolver(c, 5)
        res1 = solver.extreme(a, 2, "smallest")
        res2 = gen_eig_extreme(a, c, 2, side="smallest")
        npt.assert_allclose(res1.eigenvalues, res2.eigenvalues, atol=1e-12)
        npt.assert_allclose(res1.eigenvectors, res2.eigenvectors, atol=1e-12)


class TestGramAndTraceForm:
    def test_gram_identity(self):
        npt.assert_array_equal(gram(np.eye(2)), np.eye(2))

    def test_gram_diagonal(self):
        npt.assert_allclose(gram(np.array([[1.0, 0.0], [0.0, 2.0]])), np.diag([1.0, 4.0]))

    def test_gram_rotation_invariant(self):
        rng = np.random.default_rng(9)
        y = rng.normal(size=(3, 5))
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        assert np.linalg.norm(gram(q @ y) - gram(y)) <= 1e-12 * np.linalg.norm(gram(y))

    @pytest.mark.parametrize("seed", range(6))
    def test_gram_psd(self, seed):
        y = np.random.default_rng(seed).normal(size=(2, 6))
        k = gram(y)
        assert np.linalg.eigvalsh(k).min() >= -1e-10 * np.trace(k)
        npt.assert_allclose(k, k.T, atol=0)

    def test_trace_form_diagonal(self):
        assert trace_form(np.eye(2), np.diag([3.0, 5.0])) == pytest.approx(8.0)

    def test_trace_form_zero(self):
        assert trace_form(np.zeros((2, 4)), random_sym(4, 1)) == 0.0

    def test_trace_form_triple_product_oracle(self):
        rng = np.random.default_rng(13)
        y = rng.normal(size=(2, 4))
        m = random_sym(4, 14)
        expected = float(np.trace(y @ m @ y.T))
        assert trace_form(y, m) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_trace_form_linear_in_m(self, seed):
        rng = np.random.default_rng(seed)
        y = rng.normal(size=(3, 6))
        m1, m2 = random_sym(6, seed + 30), random_sym(6, seed + 31)
        a, b = 0.7, -1.3
        lhs = trace_form(y, a * m1 + b * m2)
        rhs = a * trace_form(y, m1) + b * trace_form(y, m2)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

    def test_trace_form_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            trace_form(np.zeros((2, 3)), np.eye(4))
