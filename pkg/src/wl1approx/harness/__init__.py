"""Experiment harness: target functions, noise models, configs and sweep drivers."""
from .config import DEFAULT_GRIDS, ConfigError, ExperimentConfig, load_config, parse_config
from .functions import (
    NotUnderdampedError,
    OscillatorParams,
    oscillator_f,
    oscillator_integrate,
    oscillator_params,
    oscillator_qoi,
    oscillator_solution,
    synthetic_f,
)
from .noise import NOISE_MODELS, NoiseModel, apply_noise
from .stats import box_stats, gnuplot_blocks
from .sweeps import COMBINATIONS, SweepResult, TrialResult, m_grid, run_m_sweep, run_parameter_sweep
