"""Noise models for the sample vector."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

NOISE_MODELS = ("none", "uniform", "gaussian", "sparse")


@dataclass(frozen=True)
class NoiseModel:
    """``uniform``/``gaussian``: a random direction rescaled to norm ``beta``.
    ``sparse``: ``round(fraction * m)`` entries get additive uniform(-amplitude, amplitude) errors.
    """

    model: str = "none"
    beta: float = 0.0
    fraction: float = 0.1
    amplitude: float = 10.0

    def __post_init__(self):
        if self.model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.model!r}; choose from {NOISE_MODELS}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.model == "sparse":
            if not 0 < self.fraction <= 1:
                raise ValueError("corruption fraction must lie in (0, 1]")
            if self.amplitude < 0:
                raise ValueError("amplitude must be >= 0")

    @property
    def level(self) -> float:
        """Scalar reported in result tables: ``beta``, or the amplitude for sparse corruption."""
        return self.amplitude if self.model == "sparse" else self.beta

    def at_level(self, level: float) -> "NoiseModel":
        if self.model == "sparse":
            return replace(self, amplitude=float(level))
        if self.model == "none":
            return self
        return replace(self, beta=float(level))

    def corrupted_count(self, m: int) -> int:
        return int(round(self.fraction * m)) if self.model == "sparse" else 0


def apply_noise(y, model: NoiseModel, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(y + e, e)``."""
    y = np.asarray(y, dtype=float)
    m = y.shape[0]
    if m < 1:
        raise ValueError("empty sample vector")
    e = np.zeros(m)
    if model.model in ("uniform", "gaussian") and model.beta > 0:
        raw = rng.uniform(-1.0, 1.0, m) if model.model == "uniform" else rng.standard_normal(m)
        e = model.beta * raw / np.linalg.norm(raw)
    elif model.model == "sparse":
        k = model.corrupted_count(m)
        where = rng.choice(m, size=k, replace=False)
        e[where] = rng.uniform(-model.amplitude, model.amplitude, k)
    return y + e, e
