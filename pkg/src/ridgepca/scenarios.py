"""Seeded synthesis of problem instances with prescribed spectra and signals.

The design is built as sqrt(n) * Q * diag(sqrt(eig)) with Q an orthonormal
n x p frame from a seeded Gaussian matrix, which makes the second moment's
eigenvalues exactly the requested ones up to roundoff. Signals are specified
in the realized principal-component basis and rotated back, so alignment
statements ("top k coordinates") are exact by construction.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ValidationError
from .model import ProblemInstance, eigendecompose, second_moment

SPECTRUM_ROUNDTRIP_RTOL = 1e-8
SIGNAL_NORM_ATOL = 1e-10


class SpectrumKind(Enum):
    FLAT = "flat"
    POLY_DECAY = "poly_decay"
    EXP_DECAY = "exp_decay"
    SPIKED = "spiked"


class SignalKind(Enum):
    TOP_ALIGNED = "top_aligned"
    BOTTOM_ALIGNED = "bottom_aligned"
    UNIFORM = "uniform"
    RANDOM = "random"


@dataclass(frozen=True)
class SpectrumSpec:
    """Recipe for a descending positive eigenvalue profile."""

    kind: SpectrumKind
    p: int
    scale: float = 1.0
    exponent: float | None = None
    rate: float | None = None
    spike_count: int | None = None
    spike_value: float | None = None
    bulk_value: float | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError(f"need p >= 1, got {self.p}")
        if not self.scale > 0.0:
            raise ValidationError(f"scale must be positive, got {self.scale}")
        if self.kind is SpectrumKind.POLY_DECAY and not (self.exponent or 0) > 0:
            raise ValidationError("poly_decay needs a positive exponent")
        if self.kind is SpectrumKind.EXP_DECAY and not (self.rate or 0) > 0:
            raise ValidationError("exp_decay needs a positive rate")
        if self.kind is SpectrumKind.SPIKED:
            if not self.spike_count or not 1 <= self.spike_count <= self.p:
                raise ValidationError("spiked needs 1 <= spike_count <= p")
            if not (self.spike_value or 0) > 0 or not (self.bulk_value or 0) > 0:
                raise ValidationError("spiked needs positive spike and bulk values")
            if self.spike_value < self.bulk_value:
                raise ValidationError("spike_value must be >= bulk_value")

    @classmethod
    def flat(cls, p: int, scale: float = 1.0):
        return cls(SpectrumKind.FLAT, p, scale)

    @classmethod
    def poly_decay(cls, p: int, exponent: float, scale: float = 1.0):
        return cls(SpectrumKind.POLY_DECAY, p, scale, exponent=exponent)

    @classmethod
    def exp_decay(cls, p: int, rate: float, scale: float = 1.0):
        return cls(SpectrumKind.EXP_DECAY, p, scale, rate=rate)

    @classmethod
    def spiked(cls, p, spike_count, spike_value, bulk_value, scale: float = 1.0):
        return cls(
            SpectrumKind.SPIKED,
            p,
            scale,
            spike_count=spike_count,
            spike_value=spike_value,
            bulk_value=bulk_value,
        )

    def eigenvalues(self) -> np.ndarray:
        j = np.arange(1, self.p + 1, dtype=float)
        if self.kind is SpectrumKind.FLAT:
            eigs = np.ones(self.p)
        elif self.kind is SpectrumKind.POLY_DECAY:
            eigs = 1.0 / j**self.exponent
        elif self.kind is SpectrumKind.EXP_DECAY:
            eigs = np.exp(-self.rate * (j - 1.0))
        else:
            eigs = np.full(self.p, self.bulk_value)
            eigs[: self.spike_count] = self.spike_value
        return self.scale * eigs


@dataclass(frozen=True)
class SignalSpec:
    """Recipe for the true signal, expressed in the principal-component basis
    of the instance it is paired with."""

    kind: SignalKind
    norm: float
    k: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if not self.norm > 0.0:
            raise ValidationError(f"norm must be positive, got {self.norm}")
        if self.kind in (SignalKind.TOP_ALIGNED, SignalKind.BOTTOM_ALIGNED):
            if not self.k or self.k < 1:
                raise ValidationError("aligned signals need k >= 1")
        if self.kind is SignalKind.RANDOM and self.seed is None:
            raise ValidationError("random signals need a seed")

    @classmethod
    def top_aligned(cls, k: int, norm: float = 1.0):
        return cls(SignalKind.TOP_ALIGNED, norm, k=k)

    @classmethod
    def bottom_aligned(cls, k: int, norm: float = 1.0):
        return cls(SignalKind.BOTTOM_ALIGNED, norm, k=k)

    @classmethod
    def uniform(cls, norm: float = 1.0):
        return cls(SignalKind.UNIFORM, norm)

    @classmethod
    def random(cls, seed: int, norm: float = 1.0):
        return cls(SignalKind.RANDOM, norm, seed=seed)

    def rotated_coefficients(self, p: int) -> np.ndarray:
        if self.kind in (SignalKind.TOP_ALIGNED, SignalKind.BOTTOM_ALIGNED):
            if self.k > p:
                raise ValidationError(f"k={self.k} exceeds dimension p={p}")
            v = np.zeros(p)
            if self.kind is SignalKind.TOP_ALIGNED:
                v[: self.k] = 1.0
            else:
                v[p - self.k :] = 1.0
        elif self.kind is SignalKind.UNIFORM:
            v = np.ones(p)
        else:
            rng = np.random.default_rng(self.seed)
            v = rng.standard_normal(p)
            while float(np.linalg.norm(v)) == 0.0:  # essentially impossible
                v = rng.standard_normal(p)
        return v * (self.norm / float(np.linalg.norm(v)))


def build_instance(
    spec: SpectrumSpec,
    signal: SignalSpec,
    n: int,
    noise_variance: float,
    seed: int,
) -> ProblemInstance:
    """Synthesize a full-column-rank instance whose second moment has the
    requested eigenvalues and whose signal has the requested alignment."""
    if n < spec.p:
        raise ValidationError(
            f"synthesis needs n >= p for full column rank, got n={n}, p={spec.p}"
        )
    eigs = spec.eigenvalues()
    rng = np.random.default_rng(seed)
    frame, _ = np.linalg.qr(rng.standard_normal((n, spec.p)))
    design = math.sqrt(n) * frame * np.sqrt(eigs)[None, :]

    # The signal is laid out in the realized eigenbasis so alignment with the
    # largest eigenvalues is exact even under spectrum ties.
    placeholder = ProblemInstance(design, np.zeros(spec.p), noise_variance, n, spec.p)
    spectrum = eigendecompose(second_moment(placeholder))
    beta = spectrum.rotation @ signal.rotated_coefficients(spec.p)
    return ProblemInstance(design, beta, noise_variance, n, spec.p)


def _pow2_at_least(x: int) -> int:
    return 1 << max(0, (x - 1).bit_length())


def _lambda_grid(eigs: np.ndarray) -> np.ndarray:
    """A grid that includes 0, every eigenvalue exactly (tie coverage),
    midpoints between consecutive distinct eigenvalues, and points beyond
    both ends of the spectrum."""
    distinct = np.unique(eigs[eigs > 0.0])
    points = {0.0, float(2.0 * distinct[-1])}
    points.update(float(v) for v in distinct)
    if distinct[0] > 0.0:
        points.add(float(distinct[0] / 2.0))
    for low, high in zip(distinct[:-1], distinct[1:]):
        points.add(float(math.sqrt(low * high)))
    return np.array(sorted(points))


def _spectrum_specs(p: int) -> list[SpectrumSpec]:
    spikes = max(1, p // 5)
    return [
        SpectrumSpec.flat(p),
        SpectrumSpec.poly_decay(p, exponent=1.0),
        SpectrumSpec.exp_decay(p, rate=0.5),
        SpectrumSpec.spiked(p, spike_count=spikes, spike_value=8.0, bulk_value=0.25),
    ]


def _signal_specs(p: int, seed: int) -> list[SignalSpec]:
    k = max(1, p // 2)
    return [
        SignalSpec.top_aligned(k),
        SignalSpec.bottom_aligned(k),
        SignalSpec.uniform(),
        SignalSpec.random(seed=seed),
    ]


def scenario_grid(seed: int) -> list[tuple[ProblemInstance, np.ndarray]]:
    """The deterministic scenario battery: every spectrum kind crossed with
    every signal kind over several dimensions, each paired with a lambda grid
    that straddles and exactly hits its eigenvalues.

    Sample counts are powers of two so that the per-coordinate noise level
    sigma^2 / n is an exact binary fraction; limit checks in the test suite
    rely on that exactness.
    """
    battery = []
    index = 0
    for p in (1, 2, 5, 20):
        n = _pow2_at_least(4 * p)
        for spec in _spectrum_specs(p):
            for signal_idx in range(4):
                child_seed = int(np.random.SeedSequence((seed, index)).generate_state(1)[0])
                signal = _signal_specs(p, seed=child_seed)[signal_idx]
                instance = build_instance(spec, signal, n, 1.0, child_seed)
                eigs = eigendecompose(second_moment(instance)).eigenvalues
                battery.append((instance, _lambda_grid(eigs)))
                index += 1
    return battery
