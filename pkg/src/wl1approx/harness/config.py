"""Declarative experiment configuration.

Config files are INI-style with sections ``[function]``, ``[sampling]``,
``[noise]``, ``[decoders]``, ``[output]`` and an optional ``[solver]``::

    [function]
    name = synthetic
    d = 8

    [sampling]
    basis = chebyshev
    s = 8
    trials = 25
    seed = 0

    [noise]
    model = uniform
    levels = 0, 1e-3, 1e-2, 1e-1

    [decoders]
    wqcbp = -7:0.5:1
    wsrlasso = -2:0.25:5

    [output]
    csv = results.csv
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

from ..indexsets import BasisKind
from ..solvers import DECODERS, SolverOptions
from .noise import NOISE_MODELS, NoiseModel

FUNCTIONS = ("synthetic", "oscillator", "sparse")

# default exponent grids (base 10) per decoder
DEFAULT_GRIDS = {
    "wqcbp": "-7:0.5:1",
    "wlasso": "-1:0.5:8",
    "wsrlasso": "-2:0.25:5",
    "wladlasso": "-2:0.25:3",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    function: str = "synthetic"
    d: int = 8
    sparsity: int = 5
    perturbation: float = 0.0
    k_scale: float = 0.05
    basis: BasisKind = BasisKind.CHEBYSHEV
    s: int = 8
    m: Optional[int] = None
    m_factors: tuple = (2.0, 2.5, 3.0, 3.5, 4.0)
    trials: int = 25
    seed: int = 0
    oversampling: int = 20
    reference: Optional[str] = None
    noise: str = "uniform"
    levels: tuple = (0.0, 1e-3, 1e-2, 1e-1)
    fraction: float = 0.1
    amplitude: float = 10.0
    decoders: tuple = tuple(DEFAULT_GRIDS.items())
    combinations: tuple = tuple(range(1, 11))
    cv_folds: int = 5
    cv_repetitions: int = 3
    cv_metric: str = "l2sq"
    cv_grid: str = "-2:0.5:2"
    csv: Optional[str] = None
    json: Optional[str] = None
    timing: bool = False
    full_scale: bool = False
    max_iterations: int = 50_000
    tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "basis", BasisKind.parse(self.basis))
        if self.function not in FUNCTIONS:
            raise ConfigError(f"unknown function {self.function!r}; choose from {FUNCTIONS}")
        if self.noise not in NOISE_MODELS:
            raise ConfigError(f"unknown noise model {self.noise!r}; choose from {NOISE_MODELS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.d < 1 or self.s < 1:
            raise ConfigError("d and s must be >= 1")
        if self.m is not None and self.m < 1:
            raise ConfigError("m must be >= 1")
        if not self.m_factors or not self.levels or not self.decoders or not self.combinations:
            raise ConfigError("grids must be non-empty")
        for name, _ in self.decoders:
            if name not in DECODERS:
                raise ConfigError(f"unknown decoder {name!r}")
        for c in self.combinations:
            if not 1 <= c <= 10:
                raise ConfigError(f"combination {c} outside 1..10")
        if self.function == "sparse" and not 1 <= self.sparsity <= self.s:
            raise ConfigError("sparsity must lie in [1, s]")
        if self.function == "oscillator" and self.d != 6:
            raise ConfigError("the oscillator has exactly 6 parameters (d = 6)")

    @property
    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.noise, 0.0, self.fraction, self.amplitude)

    @property
    def solver_options(self) -> SolverOptions:
        return SolverOptions(max_iterations=self.max_iterations, tol=self.tol)

    def override(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

    def at_full_scale(self, sweep: str) -> "ExperimentConfig":
        """Large instance sizes (d = 15, 50 trials); slow."""
        if sweep == "param":
            return replace(self, function="synthetic", d=15, s=10, m=None, trials=50)
        if sweep == "m":
            return replace(self, function="synthetic", d=10, s=15, trials=25, m_factors=(2.0, 2.5, 3.0, 3.5, 4.0))
        raise ValueError(sweep)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["basis"] = self.basis.value
        out["decoders"] = dict(self.decoders)
        return out


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


_KEYS = {
    "function": {"name": ("function", str), "d": ("d", int), "sparsity": ("sparsity", int),
                 "perturbation": ("perturbation", float), "k_scale": ("k_scale", float)},
    "sampling": {"basis": ("basis", str), "s": ("s", int), "m": ("m", int), "m_factors": ("m_factors", _floats),
                 "trials": ("trials", int), "seed": ("seed", int), "oversampling": ("oversampling", int),
                 "reference": ("reference", str)},
    "noise": {"model": ("noise", str), "levels": ("levels", _floats), "fraction": ("fraction", float),
              "amplitude": ("amplitude", float)},
    "decoders": {"combinations": ("combinations", _ints), "cv_folds": ("cv_folds", int),
                 "cv_repetitions": ("cv_repetitions", int), "cv_metric": ("cv_metric", str),
                 "cv_grid": ("cv_grid", str)},
    "output": {"csv": ("csv", str), "json": ("json", str), "timing": ("timing", _bool),
               "full_scale": ("full_scale", _bool)},
    "solver": {"max_iterations": ("max_iterations", int), "tol": ("tol", float)},
}


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in _KEYS:
            raise ConfigError(f"unknown section [{section}]")
        grids = []
        for key, raw in parser.items(section):
            if section == "decoders" and key in DECODERS:
                grids.append((key, raw.strip()))
                continue
            if key not in _KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            name, conv = _KEYS[section][key]
            try:
                values[name] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {exc}") from None
        if grids:
            values["decoders"] = tuple(grids)
    try:
        return replace(base or ExperimentConfig(), **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), base)
