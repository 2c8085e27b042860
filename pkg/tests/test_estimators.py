import numpy as np
import pytest

from ridgepca import (
    Estimate,
    Method,
    Observation,
    SingularMatrixError,
    ValidationError,
    eigendecompose,
    fit_batch,
    ols_fit,
    pca_ols_fit,
    ridge_fit,
    second_moment,
    shrinkage_factors,
)
from ridgepca.model import ProblemInstance, Spectrum

from conftest import random_dense_instance

# Sigma = diag(2, 1) exactly; eigenvalue 1 gives an exact tie at lam = 1.
TIE_DESIGN = np.array([[2.0, 1.0], [2.0, -1.0], [0.0, 1.0], [0.0, -1.0]])


class TestRidgeFit:
    def test_identity_design_hand_value(self):
        # Sigma = I/2, X'y/n = (1/2, 1/2), lam = 1: w = (1/2 + 1)^-1 * 1/2 = 1/3
        inst = ProblemInstance.from_arrays(np.eye(2), [0.0, 0.0], 0.0)
        est = ridge_fit(inst, Observation(np.array([1.0, 1.0])), 1.0)
        assert np.allclose(est.coefficients, [1 / 3, 1 / 3], rtol=1e-12)
        assert est.method is Method.RIDGE and est.lam == 1.0 and est.kept_mask is None

    def test_lam_zero_equals_ols(self):
        rng = np.random.default_rng(41)
        inst = random_dense_instance(rng, 8, 3)
        y = Observation(rng.standard_normal(8))
        ridge = ridge_fit(inst, y, 0.0)
        ols = ols_fit(inst, y)
        assert np.allclose(ridge.coefficients, ols.coefficients, rtol=0, atol=1e-10)

    def test_huge_lam_shrinks_to_zero(self):
        rng = np.random.default_rng(43)
        inst = random_dense_instance(rng, 10, 3)
        y = Observation(rng.standard_normal(10))
        big = ridge_fit(inst, y, 1e12)
        base = ols_fit(inst, y)
        assert np.linalg.norm(big.coefficients) < 1e-6 * np.linalg.norm(base.coefficients)

    def test_lam_zero_singular_raises(self):
        design = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        inst = ProblemInstance.from_arrays(design, [0.0, 0.0], 0.0)
        with pytest.raises(SingularMatrixError):
            ridge_fit(inst, Observation(np.ones(3)), 0.0)

    def test_negative_lam_rejected(self, fixture_instance):
        with pytest.raises(ValidationError):
            ridge_fit(fixture_instance, Observation(np.ones(4)), -0.5)

    def test_linearity_in_y(self):
        rng = np.random.default_rng(47)
        inst = random_dense_instance(rng, 7, 3)
        y1 = rng.standard_normal(7)
        y2 = rng.standard_normal(7)
        fit = lambda y: ridge_fit(inst, Observation(y), 0.7).coefficients
        zero = fit(np.zeros(7))
        assert np.array_equal(zero, np.zeros(3))
        lhs = fit(y1 + y2)
        rhs = fit(y1) + fit(y2) - zero
        assert np.allclose(lhs, rhs, rtol=0, atol=1e-10 * np.linalg.norm(rhs))


class TestOlsFit:
    def test_square_invertible(self):
        rng = np.random.default_rng(53)
        design = rng.standard_normal((3, 3)) + 2.0 * np.eye(3)
        inst = ProblemInstance.from_arrays(design, np.zeros(3), 0.0)
        y = rng.standard_normal(3)
        est = ols_fit(inst, Observation(y))
        assert np.allclose(est.coefficients, np.linalg.solve(design, y), rtol=1e-8)

    def test_rank_deficient_projects_and_zeroes_null_directions(self):
        design = np.array([[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0]])  # rank 1
        inst = ProblemInstance.from_arrays(design, np.zeros(2), 0.0)
        y = design @ np.array([0.5, 0.25])  # in the column space
        est = ols_fit(inst, Observation(y))
        assert np.allclose(design @ est.coefficients, y, rtol=0, atol=1e-10)
        spectrum = eigendecompose(second_moment(inst))
        coords = spectrum.rotation.T @ est.coefficients
        null_idx = spectrum.eigenvalues == 0.0
        assert np.all(np.abs(coords[null_idx]) < 1e-12)

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(59)
        inst = random_dense_instance(rng, 12, 4)
        y = rng.standard_normal(12)
        est = ols_fit(inst, Observation(y))
        oracle = np.linalg.solve(inst.design.T @ inst.design, inst.design.T @ y)
        assert np.allclose(est.coefficients, oracle, rtol=1e-8)

    def test_observation_length_checked(self, fixture_instance):
        with pytest.raises(ValidationError):
            ols_fit(fixture_instance, Observation(np.ones(3)))


class TestPcaOlsFit:
    def test_lam_zero_equals_ols(self):
        rng = np.random.default_rng(61)
        inst = random_dense_instance(rng, 9, 3)
        y = Observation(rng.standard_normal(9))
        pca = pca_ols_fit(inst, y, 0.0)
        ols = ols_fit(inst, y)
        assert np.array_equal(pca.coefficients, ols.coefficients)
        assert np.all(pca.kept_mask)

    def test_lam_above_top_gives_zero(self):
        rng = np.random.default_rng(67)
        inst = random_dense_instance(rng, 9, 3)
        est = pca_ols_fit(inst, Observation(rng.standard_normal(9)), 1e6)
        assert np.array_equal(est.coefficients, np.zeros(3))
        assert not np.any(est.kept_mask)

    def test_keep_top_drop_bottom(self, fixture_instance):
        # Sigma = diag(2, 0.5): at lam = 1 only the first coordinate survives
        y = Observation(np.array([1.0, 2.0, 0.5, -0.5]))
        pca = pca_ols_fit(fixture_instance, y, 1.0)
        ols = ols_fit(fixture_instance, y)
        assert pca.coefficients[0] == ols.coefficients[0]
        assert pca.coefficients[1] == 0.0
        assert np.array_equal(pca.kept_mask, [True, False])

    def test_exact_tie_is_retained(self):
        inst = ProblemInstance.from_arrays(TIE_DESIGN, [0.0, 0.0], 0.0)
        y = Observation(np.array([1.0, -0.5, 2.0, 0.25]))
        at_tie = pca_ols_fit(inst, y, 1.0)
        assert np.array_equal(at_tie.kept_mask, [True, True])
        past_tie = pca_ols_fit(inst, y, np.nextafter(1.0, 2.0))
        assert np.array_equal(past_tie.kept_mask, [True, False])

    def test_hard_projection_exact_on_diagonal_design(self):
        inst = ProblemInstance.from_arrays(TIE_DESIGN, [0.0, 0.0], 0.0)
        y = Observation(np.array([0.3, 1.7, -0.4, 0.9]))
        ols = ols_fit(inst, y)
        pca = pca_ols_fit(inst, y, 1.5)
        # rotation is exactly the identity here, so the mask is visible verbatim
        assert pca.coefficients[0] == ols.coefficients[0]
        assert pca.coefficients[1] == 0.0

    def test_hard_projection_dense_design(self):
        rng = np.random.default_rng(71)
        inst = random_dense_instance(rng, 10, 4)
        y = Observation(rng.standard_normal(10))
        spectrum = eigendecompose(second_moment(inst))
        lam = float(spectrum.eigenvalues[1])  # keep exactly two coordinates
        pca = pca_ols_fit(inst, y, lam)
        ols = ols_fit(inst, y)
        pca_rot = spectrum.rotation.T @ pca.coefficients
        ols_rot = spectrum.rotation.T @ ols.coefficients
        scale = np.linalg.norm(ols_rot)
        # the mask is exact internally; the basis round-trip adds only rounding
        kept = pca.kept_mask
        assert np.allclose(pca_rot[kept], ols_rot[kept], rtol=0, atol=1e-12 * scale)
        assert np.all(np.abs(pca_rot[~kept]) < 1e-12 * scale)

    def test_kept_mask_only_for_pca(self):
        with pytest.raises(ValidationError):
            Estimate(np.zeros(2), Method.RIDGE, 0.0, kept_mask=np.array([True, False]))
        with pytest.raises(ValidationError):
            Estimate(np.zeros(2), Method.PCA_OLS, 0.0)


class TestShrinkageFactors:
    def test_values(self):
        spectrum = Spectrum(np.array([2.0, 0.5]), np.eye(2))
        assert np.array_equal(shrinkage_factors(spectrum, 0.0), [1.0, 1.0])
        assert np.allclose(shrinkage_factors(spectrum, 1.0), [2 / 3, 1 / 3], rtol=1e-15)
        one = Spectrum(np.array([1.0]), np.eye(1))
        assert shrinkage_factors(one, 1.0)[0] == 0.5

    def test_zero_eigenvalue_conventions(self):
        spectrum = Spectrum(np.array([1.0, 0.0]), np.eye(2))
        assert np.array_equal(shrinkage_factors(spectrum, 0.0), [1.0, 0.0])
        assert np.array_equal(shrinkage_factors(spectrum, 2.0), [1 / 3, 0.0])

    def test_shrinkage_identity(self):
        # ridge coordinates are shrunk OLS coordinates, at every lam
        rng = np.random.default_rng(73)
        for _ in range(20):
            inst = random_dense_instance(rng, 12, 4)
            spectrum = eigendecompose(second_moment(inst))
            y = Observation(rng.standard_normal(12))
            ols_rot = spectrum.rotation.T @ ols_fit(inst, y).coefficients
            for lam in (1e-3, 0.1, 1.0, 10.0, 1e4):
                ridge_rot = spectrum.rotation.T @ ridge_fit(inst, y, lam).coefficients
                expected = shrinkage_factors(spectrum, lam) * ols_rot
                scale = np.maximum(np.abs(expected), 1e-12 * np.linalg.norm(ols_rot))
                assert np.all(np.abs(ridge_rot - expected) <= 1e-8 * scale)


class TestFitBatch:
    @pytest.mark.parametrize("method,lam", [(Method.RIDGE, 0.7), (Method.OLS, 0.0), (Method.PCA_OLS, 0.4)])
    def test_matches_single_fits(self, method, lam):
        rng = np.random.default_rng(79)
        inst = random_dense_instance(rng, 9, 3)
        ys = rng.standard_normal((5, 9))
        batch = fit_batch(inst, ys, method, lam)
        for t in range(5):
            y = Observation(ys[t])
            if method is Method.RIDGE:
                single = ridge_fit(inst, y, lam)
            elif method is Method.OLS:
                single = ols_fit(inst, y)
            else:
                single = pca_ols_fit(inst, y, lam)
            assert np.allclose(batch[t], single.coefficients, rtol=1e-13, atol=1e-15)

    def test_shape_validation(self, fixture_instance):
        with pytest.raises(ValidationError):
            fit_batch(fixture_instance, np.ones((3, 5)), Method.RIDGE, 1.0)

    def test_ols_rejects_nonzero_lam(self, fixture_instance):
        with pytest.raises(ValidationError):
            fit_batch(fixture_instance, np.ones((2, 4)), Method.OLS, 1.0)
