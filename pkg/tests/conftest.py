import numpy as np
import pytest

from ridgepca import ProblemInstance, RotatedProblem, Spectrum, scenario_grid
from ridgepca.cli import DEFAULT_BATTERY_SEED

# Reference fixture used throughout: Sigma = diag(2, 0.5) exactly, beta = (1, 1),
# sigma^2 = 1, n = 4. Closed-form values at lam = 1:
#   ridge variance 5/36, ridge bias 4/9, ridge risk 7/12, pca risk 3/4.
FIXTURE_DESIGN = np.array(
    [
        [2.0, 1.0],
        [2.0, -1.0],
        [0.0, 0.0],
        [0.0, 0.0],
    ]
)


@pytest.fixture
def fixture_instance() -> ProblemInstance:
    return ProblemInstance.from_arrays(FIXTURE_DESIGN, [1.0, 1.0], 1.0)


@pytest.fixture
def fixture_rotated() -> RotatedProblem:
    spectrum = Spectrum(np.array([2.0, 0.5]), np.eye(2))
    return RotatedProblem(spectrum, np.array([1.0, 1.0]), 1.0, 4)


def make_rotated(eigenvalues, beta, noise_variance, n) -> RotatedProblem:
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    spectrum = Spectrum(eigenvalues, np.eye(eigenvalues.size))
    return RotatedProblem(spectrum, np.asarray(beta, dtype=float), noise_variance, n)


def random_dense_instance(rng, n, p, noise_variance=1.0) -> ProblemInstance:
    design = rng.standard_normal((n, p))
    beta = rng.standard_normal(p)
    return ProblemInstance.from_arrays(design, beta, noise_variance)


@pytest.fixture(scope="session")
def battery():
    return scenario_grid(DEFAULT_BATTERY_SEED)
