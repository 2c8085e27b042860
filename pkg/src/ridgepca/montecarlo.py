"""Monte Carlo verification of the analytic risk formulas.

Noise is drawn from counter-based substreams: trial t occupies its own
block of the Philox counter space keyed by the run seed, so any trial can
be regenerated in isolation, results never depend on execution order, and
the whole noise matrix can still be produced in one vectorized call.
Gaussian draws go through the inverse normal CDF so that each noise value
consumes exactly one 64-bit word, which is what keeps the blocks aligned.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtri

from .errors import ValidationError
from .estimators import Method, Observation, fit_batch
from .model import ProblemInstance, second_moment


class NoiseKind(Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"


@dataclass(frozen=True)
class NoiseModel:
    """Noise distribution for the observation model; only the variance enters
    the analytic risk, which is exactly what the Monte Carlo checks."""

    kind: NoiseKind
    variance: float

    def __post_init__(self):
        variance = float(self.variance)
        if not variance >= 0.0:
            raise ValidationError(f"variance must be >= 0, got {variance}")
        object.__setattr__(self, "variance", variance)


@dataclass(frozen=True)
class EmpiricalRisk:
    """Monte Carlo estimate of the risk with its standard error."""

    mean: float
    std_error: float
    trials: int
    seed: int


@dataclass(frozen=True)
class EmpiricalSplit:
    """Plug-in bias-variance split estimated from the across-trial mean of the
    fitted coefficients, with delta-method standard errors.

    The bias term needs its own error bar (it is a nonlinear function of the
    mean estimate), so both terms carry one.
    """

    variance: float
    bias: float
    variance_se: float
    bias_se: float
    trials: int
    seed: int


def _words_per_trial(n: int) -> int:
    # Philox emits 4 words per counter block; pad each trial to a block boundary.
    return 4 * ((n + 3) // 4)


def trial_stream(seed: int, trial: int, n: int) -> np.random.Generator:
    """Generator positioned at the counter block reserved for one trial."""
    blocks = _words_per_trial(n) // 4
    bit_gen = np.random.Philox(key=seed, counter=[trial * blocks, 0, 0, 0])
    return np.random.Generator(bit_gen)


def _noise_from_uniforms(u: np.ndarray, noise: NoiseModel) -> np.ndarray:
    sd = math.sqrt(noise.variance)
    if noise.kind is NoiseKind.GAUSSIAN:
        # random() can emit exactly 0, where the inverse CDF diverges.
        return sd * ndtri(np.maximum(u, 2.0**-54))
    return np.where(u < 0.5, -sd, sd)


def draw_noise(noise: NoiseModel, n: int, stream: np.random.Generator) -> np.ndarray:
    """One noise vector from a stream."""
    return _noise_from_uniforms(stream.random(n), noise)


def _noise_matrix(noise: NoiseModel, n: int, trials: int, seed: int) -> np.ndarray:
    """All trials' noise at once; row t equals draw_noise on trial_stream(seed, t, n)."""
    wpt = _words_per_trial(n)
    u = np.random.Generator(np.random.Philox(key=seed)).random((trials, wpt))[:, :n]
    return _noise_from_uniforms(u, noise)


def sample_observation(
    instance: ProblemInstance, noise: NoiseModel, stream: np.random.Generator
) -> Observation:
    """Draw one label vector: the noiseless response plus i.i.d. noise."""
    if noise.variance != instance.noise_variance:
        raise ValidationError(
            f"noise variance {noise.variance} does not match the instance's "
            f"{instance.noise_variance}"
        )
    eps = draw_noise(noise, instance.n, stream)
    return Observation(instance.design @ instance.beta + eps)


def _coefficient_matrix(
    instance: ProblemInstance,
    method: Method,
    lam: float,
    noise: NoiseModel,
    trials: int,
    seed: int,
) -> np.ndarray:
    if trials < 2:
        raise ValidationError(f"need at least 2 trials, got {trials}")
    if noise.variance != instance.noise_variance:
        raise ValidationError(
            f"noise variance {noise.variance} does not match the instance's "
            f"{instance.noise_variance}"
        )
    eps = _noise_matrix(noise, instance.n, trials, seed)
    ys = (instance.design @ instance.beta)[None, :] + eps
    return fit_batch(instance, ys, method, lam)


def _quad_forms(rows: np.ndarray, sigma_matrix: np.ndarray) -> np.ndarray:
    vals = np.einsum("ij,ij->i", rows @ sigma_matrix, rows)
    return np.maximum(vals, 0.0)


def _mean_and_se(samples: np.ndarray) -> tuple[float, float]:
    # A deterministic estimator yields identical samples; report exactly zero
    # spread instead of summation roundoff.
    if np.all(samples == samples[0]):
        return float(samples[0]), 0.0
    trials = samples.shape[0]
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(trials))


def empirical_risk(
    instance: ProblemInstance,
    method: Method,
    lam: float,
    noise: NoiseModel,
    trials: int,
    seed: int,
) -> EmpiricalRisk:
    """Average Sigma-weighted squared error of the fitted coefficients over
    independent noise draws."""
    coefs = _coefficient_matrix(instance, method, lam, noise, trials, seed)
    sigma = second_moment(instance)
    errs = _quad_forms(coefs - instance.beta[None, :], sigma.matrix)
    mean, se = _mean_and_se(errs)
    return EmpiricalRisk(mean=mean, std_error=se, trials=trials, seed=seed)


def empirical_decomposition(
    instance: ProblemInstance,
    method: Method,
    lam: float,
    noise: NoiseModel,
    trials: int,
    seed: int,
) -> EmpiricalSplit:
    """Estimate the variance and bias terms separately.

    The mean estimator is the plug-in across-trial average, deliberately not
    the analytic mean, so this is an independent check of the decomposition.
    The two estimates sum to the empirical risk up to the usual order-1/trials
    plug-in correction.
    """
    coefs = _coefficient_matrix(instance, method, lam, noise, trials, seed)
    sigma = second_moment(instance)

    if np.all(coefs == coefs[0]):
        center = coefs[0]
        dev = center - instance.beta
        bias = max(float(dev @ sigma.matrix @ dev), 0.0)
        return EmpiricalSplit(0.0, bias, 0.0, 0.0, trials, seed)

    center = coefs.mean(axis=0)
    spread = coefs - center[None, :]
    per_trial = _quad_forms(spread, sigma.matrix)
    variance, variance_se = _mean_and_se(per_trial)

    dev = center - instance.beta
    bias = max(float(dev @ sigma.matrix @ dev), 0.0)
    gradient = 2.0 * (sigma.matrix @ dev)
    projected = spread @ gradient
    bias_se = float(projected.std(ddof=1) / math.sqrt(trials))
    return EmpiricalSplit(variance, bias, variance_se, bias_se, trials, seed)


def empirical_sweep(
    instance: ProblemInstance,
    lambdas,
    noise: NoiseModel,
    trials: int,
    seed: int,
) -> list[tuple[EmpiricalRisk, EmpiricalRisk]]:
    """Empirical ridge and truncated-estimator risks over a grid, sharing one
    noise matrix across all levels.

    Every entry equals the corresponding standalone empirical_risk call (same
    seed, same draws); the sharing only avoids regenerating the noise.
    """
    grid = np.asarray(lambdas, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("lambda grid must be a nonempty vector")
    if np.any(grid < 0.0):
        raise ValidationError("lambda grid must be nonnegative")
    if trials < 2:
        raise ValidationError(f"need at least 2 trials, got {trials}")
    if noise.variance != instance.noise_variance:
        raise ValidationError(
            f"noise variance {noise.variance} does not match the instance's "
            f"{instance.noise_variance}"
        )
    eps = _noise_matrix(noise, instance.n, trials, seed)
    ys = (instance.design @ instance.beta)[None, :] + eps
    sigma = second_moment(instance)
    out = []
    for lam in grid:
        pair = []
        for method in (Method.RIDGE, Method.PCA_OLS):
            coefs = fit_batch(instance, ys, method, float(lam))
            errs = _quad_forms(coefs - instance.beta[None, :], sigma.matrix)
            mean, se = _mean_and_se(errs)
            pair.append(EmpiricalRisk(mean=mean, std_error=se, trials=trials, seed=seed))
        out.append((pair[0], pair[1]))
    return out
