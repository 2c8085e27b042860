"""Coefficient estimators for the fixed-design model.

Three estimators share one geometry: ordinary least squares (minimum-norm
on rank-deficient designs), ridge regression via a penalized symmetric
solve, and least squares truncated to the top principal components. In
the eigenbasis the ridge estimate is the OLS estimate scaled coordinate
by coordinate, and the truncated estimate is the OLS estimate with a hard
keep/drop mask.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import NumericalError, SingularMatrixError, ValidationError
from .model import (
    ProblemInstance,
    SecondMoment,
    Spectrum,
    _readonly,
    eigendecompose,
    second_moment,
)

# Eigenvalues below RANK_RTOL * lam_max count as zero for rank decisions.
RANK_RTOL = 1e-12
SOLVE_RESIDUAL_RTOL = 1e-10


class Method(Enum):
    RIDGE = "ridge"
    OLS = "ols"
    PCA_OLS = "pca_ols"


@dataclass(frozen=True)
class Observation:
    """One realization of the label vector."""

    y: np.ndarray

    def __post_init__(self):
        y = _readonly(self.y)
        if y.ndim != 1 or y.shape[0] < 1:
            raise ValidationError(f"y must be a nonempty vector, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ValidationError("y must be finite")
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class Estimate:
    """A fitted coefficient vector in original coordinates, tagged with the
    method and regularization level that produced it."""

    coefficients: np.ndarray
    method: Method
    lam: float
    kept_mask: np.ndarray | None = None

    def __post_init__(self):
        coefs = _readonly(self.coefficients)
        lam = float(self.lam)
        if lam < 0.0:
            raise ValidationError(f"lam must be >= 0, got {lam}")
        if (self.kept_mask is not None) != (self.method is Method.PCA_OLS):
            raise ValidationError("kept_mask is present exactly for PCA-truncated fits")
        if self.kept_mask is not None:
            mask = _readonly(self.kept_mask, dtype=bool)
            if mask.shape != coefs.shape:
                raise ValidationError("kept_mask must match the coefficient length")
            object.__setattr__(self, "kept_mask", mask)
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "lam", lam)


def _check_observation(instance: ProblemInstance, y: Observation) -> None:
    if y.y.shape != (instance.n,):
        raise ValidationError(
            f"observation has length {y.y.shape[0]}, instance expects {instance.n}"
        )


def _rank_mask(eigenvalues: np.ndarray) -> np.ndarray:
    return eigenvalues > RANK_RTOL * float(eigenvalues[0])


def _ridge_coefs(sigma: SecondMoment, rhs: np.ndarray, lam: float) -> np.ndarray:
    """Solve (Sigma + lam I) w = rhs for each row of rhs, shape (k, p)."""
    if lam == 0.0 and sigma.smallest_eigenvalue <= RANK_RTOL * sigma.largest_eigenvalue:
        raise SingularMatrixError(
            "second moment is singular at lam = 0; use ols_fit, which applies the "
            "minimum-norm rule"
        )
    gram = sigma.matrix + lam * np.eye(sigma.p)
    try:
        coefs = scipy.linalg.solve(gram, rhs.T, assume_a="pos").T
    except np.linalg.LinAlgError:
        # Sigma is PSD only within tolerance; tiny lam can leave the system
        # indefinite at roundoff level. Fall back to a general solve and let
        # the residual check below decide.
        coefs = np.linalg.solve(gram, rhs.T).T
    residual = np.linalg.norm(rhs - coefs @ gram, axis=-1)
    scale = np.linalg.norm(rhs, axis=-1)
    if np.any(residual > SOLVE_RESIDUAL_RTOL * np.maximum(scale, np.finfo(float).tiny)):
        worst = float(np.max(residual / np.maximum(scale, np.finfo(float).tiny)))
        raise NumericalError(
            f"penalized solve missed its residual target: relative residual {worst:.3e} "
            f"at lam={lam:g}"
        )
    return coefs


def _ols_rotated(spectrum: Spectrum, rhs_rotated: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares coordinates in the eigenbasis, rows (k, p)."""
    eigs = spectrum.eigenvalues
    mask = _rank_mask(eigs)
    out = np.zeros_like(rhs_rotated)
    np.divide(rhs_rotated, eigs[None, :], out=out, where=mask[None, :])
    return out


def ridge_fit(instance: ProblemInstance, y: Observation, lam: float) -> Estimate:
    """Ridge estimate: the solution of (Sigma + lam I) w = X'y / n."""
    _check_observation(instance, y)
    if lam < 0.0:
        raise ValidationError(f"lam must be >= 0, got {lam}")
    sigma = second_moment(instance)
    rhs = instance.design.T @ y.y / instance.n
    coefs = _ridge_coefs(sigma, rhs[None, :], float(lam))[0]
    return Estimate(coefs, Method.RIDGE, float(lam))


def ols_fit(instance: ProblemInstance, y: Observation) -> Estimate:
    """Ordinary least squares with the minimum-norm rule on rank deficiency.

    In the eigenbasis each coordinate is the projected data divided by its
    eigenvalue; coordinates whose eigenvalue is numerically zero are set to 0.
    """
    _check_observation(instance, y)
    spectrum = eigendecompose(second_moment(instance))
    rhs = instance.design.T @ y.y / instance.n
    coords = _ols_rotated(spectrum, (spectrum.rotation.T @ rhs)[None, :])[0]
    return Estimate(spectrum.rotation @ coords, Method.OLS, 0.0)


def pca_ols_fit(instance: ProblemInstance, y: Observation, lam: float) -> Estimate:
    """Least squares restricted to principal components with eigenvalue >= lam.

    Retained coordinates keep their OLS values exactly; the rest are zeroed.
    A tie (eigenvalue equal to lam) is retained. Numerically zero eigenvalues
    are never retained, matching the minimum-norm rule.
    """
    _check_observation(instance, y)
    if lam < 0.0:
        raise ValidationError(f"lam must be >= 0, got {lam}")
    spectrum = eigendecompose(second_moment(instance))
    rhs = instance.design.T @ y.y / instance.n
    coords = _ols_rotated(spectrum, (spectrum.rotation.T @ rhs)[None, :])[0]
    kept = (spectrum.eigenvalues >= lam) & _rank_mask(spectrum.eigenvalues)
    coords = np.where(kept, coords, 0.0)
    return Estimate(spectrum.rotation @ coords, Method.PCA_OLS, float(lam), kept_mask=kept)


def shrinkage_factors(spectrum: Spectrum, lam: float) -> np.ndarray:
    """Per-coordinate multipliers eig / (eig + lam) linking ridge to OLS.

    A positive eigenvalue with lam = 0 gives exactly 1; a zero eigenvalue
    gives 0 whether lam is positive (full shrinkage) or zero (the minimum-norm
    convention zeroes that coordinate anyway).
    """
    if lam < 0.0:
        raise ValidationError(f"lam must be >= 0, got {lam}")
    eigs = spectrum.eigenvalues
    denom = eigs + lam
    out = np.zeros_like(eigs)
    np.divide(eigs, denom, out=out, where=denom > 0.0)
    return out


def fit_batch(
    instance: ProblemInstance, ys: np.ndarray, method: Method, lam: float = 0.0
) -> np.ndarray:
    """Fit one estimator to many observations at once.

    ``ys`` has one observation per row, shape (k, n); the result has the
    matching coefficient vectors as rows, shape (k, p). This is the same
    algebra as the single-observation fits, batched for Monte Carlo
    throughput, and is tested to agree with them.
    """
    ys = np.asarray(ys, dtype=float)
    if ys.ndim != 2 or ys.shape[1] != instance.n:
        raise ValidationError(
            f"ys must have shape (k, {instance.n}), got {ys.shape}"
        )
    lam = float(lam)
    if lam < 0.0:
        raise ValidationError(f"lam must be >= 0, got {lam}")
    if method is Method.OLS and lam != 0.0:
        raise ValidationError("OLS has no regularization level; pass lam=0")
    rhs = ys @ instance.design / instance.n
    if method is Method.RIDGE:
        return _ridge_coefs(second_moment(instance), rhs, lam)
    spectrum = eigendecompose(second_moment(instance))
    coords = _ols_rotated(spectrum, rhs @ spectrum.rotation)
    if method is Method.PCA_OLS:
        kept = (spectrum.eigenvalues >= lam) & _rank_mask(spectrum.eigenvalues)
        coords = np.where(kept[None, :], coords, 0.0)
    return coords @ spectrum.rotation.T
