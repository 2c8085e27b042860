"""Experiment configuration: a single JSON document describing the problem
instance, the regularization grid, and optional Monte Carlo settings.

Schema (all numbers are plain JSON numbers):

    {
      "instance": {
        // inline form:
        "design": [[...], ...], "beta": [...], "noise_variance": 1.0
        // or synthesis form:
        "spectrum": {"kind": "flat" | "poly_decay" | "exp_decay" | "spiked",
                     "p": 2, "scale": 1.0,
                     "exponent": ..., "rate": ...,
                     "spike_count": ..., "spike_value": ..., "bulk_value": ...},
        "signal":   {"kind": "top_aligned" | "bottom_aligned" | "uniform" | "random",
                     "norm": 1.0, "k": ..., "seed": ...},
        "n": 8, "noise_variance": 1.0, "seed": 7
      },
      "lambdas": {"values": [0.0, 1.0]}            // explicit, strictly ascending
               | {"min": 0.01, "max": 100, "count": 25},   // log-spaced
      "monte_carlo": {"enabled": true, "trials": 100000, "seed": 42,
                      "noise": "gaussian" | "rademacher"},   // optional
      "output": {"csv": "sweep.csv", "plot": "sweep.svg"}    // optional defaults
    }

Exactly one instance form must be present.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ValidationError
from .model import ProblemInstance
from .montecarlo import NoiseKind
from .scenarios import SignalKind, SignalSpec, SpectrumKind, SpectrumSpec, build_instance


@dataclass(frozen=True)
class MonteCarloConfig:
    enabled: bool
    trials: int
    seed: int
    noise_kind: NoiseKind


@dataclass(frozen=True)
class OutputConfig:
    csv_path: str | None = None
    plot_path: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    instance: ProblemInstance
    lambdas: np.ndarray
    monte_carlo: MonteCarloConfig | None
    output: OutputConfig


def _require(mapping, key, kind, where):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key '{key}'")
    value = mapping[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"{where}: '{key}' must be of type {kind.__name__}")
    return value


def _build_spectrum_spec(raw, where) -> SpectrumSpec:
    kind_name = _require(raw, "kind", str, where)
    try:
        kind = SpectrumKind(kind_name)
    except ValueError:
        raise ConfigError(f"{where}: unknown spectrum kind '{kind_name}'") from None
    p = _require(raw, "p", int, where)
    scale = float(raw.get("scale", 1.0))
    try:
        if kind is SpectrumKind.FLAT:
            return SpectrumSpec.flat(p, scale)
        if kind is SpectrumKind.POLY_DECAY:
            return SpectrumSpec.poly_decay(p, _require(raw, "exponent", float, where), scale)
        if kind is SpectrumKind.EXP_DECAY:
            return SpectrumSpec.exp_decay(p, _require(raw, "rate", float, where), scale)
        return SpectrumSpec.spiked(
            p,
            _require(raw, "spike_count", int, where),
            _require(raw, "spike_value", float, where),
            _require(raw, "bulk_value", float, where),
            scale,
        )
    except ValidationError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _build_signal_spec(raw, where) -> SignalSpec:
    kind_name = _require(raw, "kind", str, where)
    try:
        kind = SignalKind(kind_name)
    except ValueError:
        raise ConfigError(f"{where}: unknown signal kind '{kind_name}'") from None
    norm = float(raw.get("norm", 1.0))
    try:
        if kind is SignalKind.TOP_ALIGNED:
            return SignalSpec.top_aligned(_require(raw, "k", int, where), norm)
        if kind is SignalKind.BOTTOM_ALIGNED:
            return SignalSpec.bottom_aligned(_require(raw, "k", int, where), norm)
        if kind is SignalKind.UNIFORM:
            return SignalSpec.uniform(norm)
        return SignalSpec.random(_require(raw, "seed", int, where), norm)
    except ValidationError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _build_instance(raw, seed_override) -> ProblemInstance:
    if not isinstance(raw, dict):
        raise ConfigError("'instance' must be an object")
    inline = "design" in raw
    synthesis = "spectrum" in raw
    if inline == synthesis:
        raise ConfigError(
            "'instance' must contain exactly one source: either 'design' (inline) "
            "or 'spectrum' (synthesis)"
        )
    noise_variance = _require(raw, "noise_variance", float, "instance")
    try:
        if inline:
            return ProblemInstance.from_arrays(
                raw["design"], _require(raw, "beta", list, "instance"), noise_variance
            )
        spectrum = _build_spectrum_spec(
            _require(raw, "spectrum", dict, "instance"), "instance.spectrum"
        )
        signal = _build_signal_spec(
            _require(raw, "signal", dict, "instance"), "instance.signal"
        )
        n = _require(raw, "n", int, "instance")
        seed = _require(raw, "seed", int, "instance") if seed_override is None else seed_override
        return build_instance(spectrum, signal, n, noise_variance, seed)
    except ValidationError as exc:
        raise ConfigError(f"instance: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"instance: {exc}") from exc


def _build_lambdas(raw) -> np.ndarray:
    if not isinstance(raw, dict):
        raise ConfigError("'lambdas' must be an object")
    if ("values" in raw) == ("count" in raw):
        raise ConfigError("'lambdas' must have either 'values' or a min/max/count block")
    if "values" in raw:
        values = raw["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("'lambdas.values' must be a nonempty list")
        grid = np.asarray(values, dtype=float)
        if grid.ndim != 1:
            raise ConfigError("'lambdas.values' must be a flat list of numbers")
    else:
        lo = _require(raw, "min", float, "lambdas")
        hi = _require(raw, "max", float, "lambdas")
        count = _require(raw, "count", int, "lambdas")
        if not (0.0 < lo < hi) or count < 2:
            raise ConfigError("log-spaced grid needs 0 < min < max and count >= 2")
        grid = np.geomspace(lo, hi, count)
    if np.any(grid < 0.0):
        raise ConfigError("lambda grid must be nonnegative")
    if np.any(np.diff(grid) <= 0.0):
        raise ConfigError("lambda grid must be strictly ascending")
    return grid


def _build_monte_carlo(raw, seed_override) -> MonteCarloConfig:
    if not isinstance(raw, dict):
        raise ConfigError("'monte_carlo' must be an object")
    enabled = raw.get("enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigError("'monte_carlo.enabled' must be a boolean")
    trials = _require(raw, "trials", int, "monte_carlo")
    if trials < 2:
        raise ConfigError("'monte_carlo.trials' must be at least 2")
    seed = _require(raw, "seed", int, "monte_carlo") if seed_override is None else seed_override
    noise_name = raw.get("noise", "gaussian")
    try:
        noise_kind = NoiseKind(noise_name)
    except ValueError:
        raise ConfigError(f"unknown noise kind '{noise_name}'") from None
    return MonteCarloConfig(enabled=enabled, trials=trials, seed=seed, noise_kind=noise_kind)


def load_config(path: str, seed_override: int | None = None) -> ExperimentConfig:
    """Parse and validate a config file; --seed overrides every seed it contains."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    if "instance" not in raw:
        raise ConfigError("missing required key 'instance'")
    if "lambdas" not in raw:
        raise ConfigError("missing required key 'lambdas'")
    instance = _build_instance(raw["instance"], seed_override)
    lambdas = _build_lambdas(raw["lambdas"])
    monte_carlo = (
        _build_monte_carlo(raw["monte_carlo"], seed_override) if "monte_carlo" in raw else None
    )

    output_raw = raw.get("output", {})
    if not isinstance(output_raw, dict):
        raise ConfigError("'output' must be an object")
    output = OutputConfig(
        csv_path=output_raw.get("csv"), plot_path=output_raw.get("plot")
    )
    return ExperimentConfig(
        instance=instance, lambdas=lambdas, monte_carlo=monte_carlo, output=output
    )
