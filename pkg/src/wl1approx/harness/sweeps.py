"""Experiment drivers: parameter sweeps and sample-complexity sweeps.

Randomness is split per trial: trial ``t`` (and m-grid position ``j`` for
sample-complexity sweeps) draws from ``SeedSequence(seed, spawn_key=(t,))``
(resp. ``(t, j)``), spawned into independent streams for sample points,
noise, ground truth, cross-validation folds and solver-error perturbations.
The least-squares reference uses its own stream. Results are therefore
bit-identical for a fixed seed regardless of how many trials are run.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..basis import DesignProblem, assemble, expansion, sample_measure
from ..indexsets import IndexSet, hyperbolic_cross, intrinsic_lower_sparsity, random_lower_set
from ..metrics import ReferenceSolution, l2_error, least_squares_reference, linf_surrogate
from ..solvers import DecoderKind, InfeasibleError, operator_norm, solve
from ..tuning import CvSpec, cross_validate, parse_grid, recommended_m
from .config import ExperimentConfig
from .functions import oscillator_f, synthetic_f
from .noise import apply_noise
from .stats import box_stats

CSV_HEADER = ("trial", "decoder", "param", "m", "beta", "l2_error", "linf_surrogate", "iterations", "seconds", "status")

_REFERENCE_KEY = 2**31 - 1

COMBINATIONS = {
    1: "wqcbp, eta = 0",
    2: "wqcbp, eta = oracle noise norm",
    3: "wqcbp, cross-validated around the oracle eta",
    4: "wlasso, lambda = sqrt(K)/oracle noise norm",
    5: "wlasso, cross-validated around the oracle lambda",
    6: "wsrlasso, lambda = 3 sqrt(K)",
    7: "wsrlasso, cross-validated around 3 sqrt(K)",
    8: "wladlasso, lambda = 3/sqrt((k/m) ln n)",
    9: "wladlasso, cross-validated around 3 sqrt(k)/sqrt(m ln n)",
    10: "wladlasso, lambda = 1",
}
_COMBO_DECODER = {1: "wqcbp", 2: "wqcbp", 3: "wqcbp", 4: "wlasso", 5: "wlasso", 6: "wsrlasso",
                  7: "wsrlasso", 8: "wladlasso", 9: "wladlasso", 10: "wladlasso"}


@dataclass
class TrialResult:
    trial: int
    decoder: str
    param: float
    m: int
    beta: float
    l2_error: float
    linf_surrogate: float
    iterations: int
    seconds: float
    status: str = "ok"

    def as_row(self) -> list:
        return [self.trial, self.decoder, f"{self.param:.17g}", self.m, f"{self.beta:.17g}",
                f"{self.l2_error:.17g}", f"{self.linf_surrogate:.17g}", self.iterations,
                f"{self.seconds:.6f}", self.status]


@dataclass
class SweepResult:
    config: ExperimentConfig
    kind: str
    rows: list = field(default_factory=list)
    noise: dict = field(default_factory=dict)
    problems: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.as_row())
        return buf.getvalue()

    def cells(self) -> list[dict]:
        if self.kind == "param":
            keys = ("decoder", "beta", "param")
        else:
            keys = ("decoder", "beta", "m")
        groups: dict = {}
        for r in self.rows:
            groups.setdefault(tuple(getattr(r, k) for k in keys), []).append(r)
        out = []
        for key, rows in groups.items():
            cell = dict(zip(keys, key))
            cell.update(box_stats([r.l2_error for r in rows]))
            if self.kind == "m":
                cell["mean_param"] = float(np.nanmean([r.param for r in rows])) if any(
                    math.isfinite(r.param) for r in rows) else math.nan
            out.append(cell)
        return out

    def summary(self) -> dict:
        return {"sweep": self.kind, "config": self.config.to_dict(), "cells": self.cells()}

    def write(self, csv_path: Optional[str] = None, json_path: Optional[str] = None) -> None:
        if csv_path:
            with open(csv_path, "w", newline="") as fh:
                fh.write(self.csv_text())
        if json_path:
            with open(json_path, "w") as fh:
                json.dump(_jsonable(self.summary()), fh, indent=2, sort_keys=True)
                fh.write("\n")

    def medians(self, decoder: str, beta: float) -> tuple[np.ndarray, np.ndarray]:
        """Grid parameters and median l2 errors for one decoder and noise level."""
        cells = [c for c in self.cells() if c["decoder"] == decoder and c["beta"] == beta]
        cells.sort(key=lambda c: c.get("param", c.get("m")))
        return (np.array([c.get("param", c.get("m")) for c in cells]),
                np.array([c["median"] for c in cells]))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    return obj


def _streams(seed: int, key: tuple, count: int = 5) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed, spawn_key=key).spawn(count)]


def build_reference(config: ExperimentConfig, index_set: IndexSet) -> Optional[ReferenceSolution]:
    """Least-squares reference for fixed target functions; ``None`` for random sparse targets."""
    if config.function == "sparse":
        return None
    if config.reference:
        ref = ReferenceSolution.load(config.reference)
        if ref.index_set != index_set:
            raise ValueError(f"reference {config.reference} was built on a different index set")
        return ref
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(_REFERENCE_KEY,)))
    return least_squares_reference(_clean_function(config), index_set, config.basis, config.oversampling, rng)


def _clean_function(config: ExperimentConfig) -> Callable:
    if config.function == "synthetic":
        return synthetic_f
    if config.function == "oscillator":
        return lambda pts: oscillator_f(pts, k_scale=config.k_scale)
    raise ValueError(config.function)


def _target(config, index_set, reference, rng_truth, rng_perturb):
    """Return the sampled function and the coefficient vector errors are measured against."""
    if config.function == "sparse":
        support = random_lower_set(config.d, config.sparsity, rng_truth)
        x = np.zeros(len(index_set))
        for i in support:
            x[index_set.position(i)] = rng_truth.standard_normal()
        return expansion(config.basis, index_set, x), x
    f = _clean_function(config)
    if config.perturbation > 0:
        base, delta = f, config.perturbation
        f = lambda pts: base(pts) + delta * rng_perturb.uniform(-1.0, 1.0, len(pts))
    return f, reference.coefficients


def _run_one(problem: DesignProblem, kind: DecoderKind, x_ref, opts, norm, trial, label, m, level, timing):
    t0 = time.perf_counter()
    try:
        sol = solve(problem, kind, opts, norm=norm)
    except InfeasibleError:
        return TrialResult(trial, label, kind.param, m, level, math.nan, math.nan, 0, 0.0, "infeasible")
    secs = time.perf_counter() - t0 if timing else 0.0
    return TrialResult(
        trial, label, kind.param, m, level,
        l2_error(sol.x, x_ref), linf_surrogate(sol.x, x_ref, problem.weights),
        sol.iterations, secs, "ok" if sol.converged else "not_converged",
    )


def sweep_m_value(config: ExperimentConfig, n: int) -> int:
    return config.m if config.m is not None else recommended_m(config.s, config.basis, n)


def run_parameter_sweep(config: ExperimentConfig) -> SweepResult:
    """Error against each tuning parameter, for every decoder grid and noise level.

    Within a trial one set of sample points (hence one design matrix) is shared
    by all noise levels and grid parameters.
    """
    index_set = hyperbolic_cross(config.d, config.s)
    n = len(index_set)
    m = sweep_m_value(config, n)
    reference = build_reference(config, index_set)
    model = config.noise_model
    levels = (0.0,) if model.model == "none" else config.levels
    grids = [(name, parse_grid(g)) for name, g in config.decoders]
    opts = config.solver_options
    result = SweepResult(config, "param")
    for trial in range(config.trials):
        r_pts, r_noise, r_truth, _, r_pert = _streams(config.seed, (trial,))
        f, x_ref = _target(config, index_set, reference, r_truth, r_pert)
        pts = sample_measure(config.basis, config.d, m, r_pts)
        base = assemble(config.basis, index_set, pts, f(pts))
        norm = operator_norm(base.A)
        result.problems[trial] = base
        for level in levels:
            y, e = apply_noise(base.y, model.at_level(level), r_noise)
            result.noise[(trial, m, level)] = e
            prob = base.with_data(y)
            for name, grid in grids:
                for p in grid:
                    result.rows.append(_run_one(prob, DecoderKind(name, float(p)), x_ref, opts, norm,
                                                trial, name, m, level, config.timing))
    return result


def m_grid(config: ExperimentConfig) -> list[int]:
    K = intrinsic_lower_sparsity(config.basis, config.s, config.d)
    # s**gamma is an integer for power-of-two s under Chebyshev; drop the round-off before ceil
    return [math.ceil(round(c * K, 9)) for c in config.m_factors]


def run_m_sweep(config: ExperimentConfig) -> SweepResult:
    """Error against sample count for the selected decoder/parameter combinations.

    ``m`` runs over ``ceil(C * s^gamma)`` for ``C`` in ``config.m_factors``. The
    noise model is applied at its first configured level.
    """
    index_set = hyperbolic_cross(config.d, config.s)
    n = len(index_set)
    K = intrinsic_lower_sparsity(config.basis, config.s, config.d)
    reference = build_reference(config, index_set)
    model = config.noise_model.at_level(config.levels[0]) if config.noise != "none" else config.noise_model
    level = model.level if model.model != "none" else 0.0
    opts = config.solver_options
    cv_grid = parse_grid(config.cv_grid)
    result = SweepResult(config, "m")
    for trial in range(config.trials):
        for j, m in enumerate(m_grid(config)):
            r_pts, r_noise, r_truth, r_cv, r_pert = _streams(config.seed, (trial, j))
            f, x_ref = _target(config, index_set, reference, r_truth, r_pert)
            pts = sample_measure(config.basis, config.d, m, r_pts)
            base = assemble(config.basis, index_set, pts, f(pts))
            y, e = apply_noise(base.y, model, r_noise)
            result.noise[(trial, m, level)] = e
            prob = base.with_data(y)
            norm = operator_norm(prob.A)
            eta_oracle = float(np.linalg.norm(prob.A @ x_ref - prob.y))
            k = model.corrupted_count(m) or m
            for c in config.combinations:
                result.rows.append(_combination(c, prob, x_ref, opts, norm, trial, m, level, K, n, k,
                                                eta_oracle, cv_grid, r_cv, config))
    return result


def _combination(c, prob, x_ref, opts, norm, trial, m, level, K, n, k, eta_oracle, cv_grid, rng, config):
    name = _COMBO_DECODER[c]
    label = f"c{c}:{name}"
    lam_oracle = math.sqrt(K) / eta_oracle if eta_oracle > 0 else math.inf
    centre = {
        1: 0.0,
        2: eta_oracle,
        3: eta_oracle,
        4: lam_oracle,
        5: lam_oracle,
        6: 3.0 * math.sqrt(K),
        7: 3.0 * math.sqrt(K),
        8: 3.0 / math.sqrt((k / m) * math.log(n)),
        9: 3.0 * math.sqrt(k) / math.sqrt(m * math.log(n)),
        10: 1.0,
    }[c]
    if not math.isfinite(centre):
        return TrialResult(trial, label, centre, m, level, math.nan, math.nan, 0, 0.0, "undefined")
    param = centre
    t0 = time.perf_counter()
    if c in (3, 5, 7, 9):
        spec = CvSpec(config.cv_folds, config.cv_repetitions, tuple(centre * cv_grid), name, config.cv_metric)
        param = cross_validate(prob, spec, rng, opts=opts).parameter
    row = _run_one(prob, DecoderKind(name, param), x_ref, opts, norm, trial, label, m, level, config.timing)
    if config.timing:
        row.seconds = time.perf_counter() - t0
    return row
