"""Fixed-design regression model.

Holds the design matrix, its empirical second-moment matrix, the
principal-component rotation, and the quadratic-form loss that defines
excess risk. Everything downstream (estimators, risk formulas, Monte
Carlo) consumes these primitives.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

# Additive entrywise tolerance for symmetry of a second-moment matrix.
SYMMETRY_ATOL = 1e-12
# Negative eigenvalues above -EIGENVALUE_CLAMP_RTOL * lam_max are numerical
# zeros; anything below fails positive-semidefiniteness.
EIGENVALUE_CLAMP_RTOL = 1e-10
ORTHOGONALITY_ATOL = 1e-10
RECONSTRUCTION_RTOL = 1e-8


def _readonly(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ProblemInstance:
    """Ground truth of an experiment: design matrix, true signal, noise level.

    The design is deterministic; only the observation noise is random.
    """

    design: np.ndarray
    beta: np.ndarray
    noise_variance: float
    n: int
    p: int

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValidationError(f"need n >= 1 and p >= 1, got n={self.n}, p={self.p}")
        design = _readonly(self.design)
        beta = _readonly(self.beta)
        if design.shape != (self.n, self.p):
            raise ValidationError(
                f"design must be {self.n}x{self.p}, got shape {design.shape}"
            )
        if beta.shape != (self.p,):
            raise ValidationError(f"beta must have length {self.p}, got {beta.shape}")
        if not np.all(np.isfinite(design)) or not np.all(np.isfinite(beta)):
            raise ValidationError("design and beta must be finite")
        sigma2 = float(self.noise_variance)
        if not sigma2 >= 0.0:
            raise ValidationError(f"noise_variance must be >= 0, got {sigma2}")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "noise_variance", sigma2)

    @classmethod
    def from_arrays(cls, design, beta, noise_variance) -> "ProblemInstance":
        """Build an instance, inferring the sample count and dimension."""
        design = np.asarray(design, dtype=float)
        if design.ndim != 2:
            raise ValidationError(f"design must be a matrix, got ndim={design.ndim}")
        n, p = design.shape
        return cls(design, np.asarray(beta, dtype=float), noise_variance, n, p)


@dataclass(frozen=True)
class SecondMoment:
    """Symmetric positive-semidefinite second-moment matrix of a design.

    Eigenvalues are computed once at construction (they validate
    semidefiniteness) and cached for downstream rank checks.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValidationError(f"matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("matrix must be finite")
        asym = float(np.max(np.abs(m - m.T)))
        if asym > SYMMETRY_ATOL:
            raise ValidationError(
                f"matrix is not symmetric: max entry asymmetry {asym:.3e} > {SYMMETRY_ATOL}"
            )
        try:
            eigs = np.linalg.eigvalsh(m)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"eigenvalue computation failed on a {m.shape[0]}x{m.shape[0]} matrix "
                f"(Frobenius norm {np.linalg.norm(m):.3e})"
            ) from exc
        largest = float(eigs[-1])
        smallest = float(eigs[0])
        if smallest < -EIGENVALUE_CLAMP_RTOL * max(largest, 0.0):
            raise ValidationError(
                f"matrix is not positive semidefinite: smallest eigenvalue {smallest:.3e}, "
                f"largest {largest:.3e}"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_eigs_ascending", _readonly(eigs))

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @property
    def largest_eigenvalue(self) -> float:
        return float(self._eigs_ascending[-1])

    @property
    def smallest_eigenvalue(self) -> float:
        return float(self._eigs_ascending[0])


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues of the second moment plus the orthogonal change
    of basis into principal-component coordinates (columns are eigenvectors)."""

    eigenvalues: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        eigs = _readonly(self.eigenvalues)
        rot = _readonly(self.rotation)
        p = eigs.shape[0] if eigs.ndim == 1 else 0
        if p < 1 or rot.shape != (p, p):
            raise ValidationError(
                f"need eigenvalues (p,) and rotation (p, p), got {eigs.shape} and {rot.shape}"
            )
        if np.any(np.diff(eigs) > 0.0):
            raise ValidationError("eigenvalues must be sorted in descending order")
        if float(eigs[-1]) < 0.0:
            raise ValidationError("eigenvalues must be nonnegative after clamping")
        ortho_err = float(np.max(np.abs(rot.T @ rot - np.eye(p))))
        if ortho_err > ORTHOGONALITY_ATOL:
            raise ValidationError(
                f"rotation is not orthogonal: max |R'R - I| entry {ortho_err:.3e}"
            )
        object.__setattr__(self, "eigenvalues", eigs)
        object.__setattr__(self, "rotation", rot)

    @property
    def p(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class RotatedProblem:
    """A problem expressed in principal-component coordinates, where the
    second moment is diagonal and risk formulas are per-coordinate sums."""

    spectrum: Spectrum
    beta_rotated: np.ndarray
    noise_variance: float
    n: int

    def __post_init__(self):
        beta = _readonly(self.beta_rotated)
        if beta.shape != (self.spectrum.p,):
            raise ValidationError(
                f"beta_rotated must have length {self.spectrum.p}, got {beta.shape}"
            )
        sigma2 = float(self.noise_variance)
        if not sigma2 >= 0.0:
            raise ValidationError(f"noise_variance must be >= 0, got {sigma2}")
        if self.n < 1:
            raise ValidationError(f"need n >= 1, got {self.n}")
        object.__setattr__(self, "beta_rotated", beta)
        object.__setattr__(self, "noise_variance", sigma2)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def p(self) -> int:
        return self.spectrum.p


def second_moment(instance: ProblemInstance) -> SecondMoment:
    """Empirical second-moment matrix of the design, X'X / n.

    The product is symmetrized explicitly so the result satisfies the
    entrywise symmetry contract regardless of BLAS rounding.
    """
    m = instance.design.T @ instance.design / instance.n
    return SecondMoment((m + m.T) / 2.0)


def eigendecompose(sigma: SecondMoment) -> Spectrum:
    """Eigenvalues (descending) and eigenvectors of a second-moment matrix.

    Negative eigenvalues within the PSD tolerance are clamped to exactly 0.
    Ties keep the eigensolver's output order; each eigenvector's sign is
    normalized so its largest-magnitude entry is positive, which makes the
    rotated coordinate system reproducible.
    """
    try:
        vals, vecs = np.linalg.eigh(sigma.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition did not converge on a {sigma.p}x{sigma.p} matrix: "
            f"largest eigenvalue approx {sigma.largest_eigenvalue:.3e}, "
            f"smallest approx {sigma.smallest_eigenvalue:.3e}"
        ) from exc
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    vals = np.where(vals < 0.0, 0.0, vals)

    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0.0] = 1.0
    vecs = vecs * signs

    spectrum = Spectrum(vals, vecs)
    recon = (vecs * vals) @ vecs.T
    scale = float(np.linalg.norm(sigma.matrix))
    err = float(np.linalg.norm(recon - sigma.matrix))
    if err > RECONSTRUCTION_RTOL * max(scale, np.finfo(float).tiny):
        raise NumericalError(
            f"eigendecomposition lost accuracy: relative reconstruction error "
            f"{err / max(scale, np.finfo(float).tiny):.3e}, eigenvalue range "
            f"[{vals[-1]:.3e}, {vals[0]:.3e}]"
        )
    return spectrum


def rotate_problem(instance: ProblemInstance, spectrum: Spectrum) -> RotatedProblem:
    """Express the signal in principal-component coordinates."""
    if spectrum.p != instance.p:
        raise ValidationError(
            f"spectrum dimension {spectrum.p} does not match instance dimension {instance.p}"
        )
    beta_rotated = spectrum.rotation.T @ instance.beta
    return RotatedProblem(spectrum, beta_rotated, instance.noise_variance, instance.n)


def sigma_norm_sq(v, sigma: SecondMoment) -> float:
    """Quadratic form v' Sigma v, the squared prediction-space norm.

    Semidefiniteness of Sigma bounds any negative rounding artifact by
    1e-10 * |v|^2 * lam_max, so negatives are clamped to 0.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (sigma.p,):
        raise ValidationError(f"vector must have length {sigma.p}, got shape {v.shape}")
    q = float(v @ sigma.matrix @ v)
    return max(q, 0.0)


def expected_loss(w, instance: ProblemInstance) -> float:
    """Expected mean squared prediction loss of coefficients w.

    The expectation over the noise is taken analytically: it equals the
    noise variance plus the Sigma-weighted squared error of w, so no
    sampling is involved.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (instance.p,):
        raise ValidationError(f"w must have length {instance.p}, got shape {w.shape}")
    return instance.noise_variance + sigma_norm_sq(w - instance.beta, second_moment(instance))
