"""Tuning-parameter recipes, sample-complexity helpers and K-fold cross validation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .basis import DesignProblem
from .indexsets import BasisKind, intrinsic_lower_sparsity
from .solvers import DECODERS, DecoderKind, SolverOptions, operator_norm, solve

# hidden constant of the WSR-LASSO / WLAD-LASSO recipes, fixed empirically
RECIPE_CONSTANT = 3.0


def recommend(
    decoder: str,
    s: int,
    kind: BasisKind,
    noise_estimate: float | None = None,
    k: int | None = None,
    m: int | None = None,
    n: int | None = None,
    practical: bool = False,
    constant: float = RECIPE_CONSTANT,
) -> float:
    """Theory-driven tuning parameter for ``decoder``.

    K(s) is replaced by its upper bound ``s**gamma``. For ``wladlasso`` the
    theory form ``constant / sqrt((k/m) ln n)`` needs ``k``, ``m`` and ``n``;
    ``practical=True`` returns 1 instead.
    """
    K = intrinsic_lower_sparsity(kind, s, 1)
    if decoder == "wqcbp":
        if noise_estimate is None:
            raise ValueError("wqcbp recipe needs a noise estimate")
        if noise_estimate < 0:
            raise ValueError("noise estimate must be >= 0")
        return float(noise_estimate)
    if decoder == "wlasso":
        if noise_estimate is None:
            raise ValueError("wlasso recipe needs a noise estimate")
        if noise_estimate <= 0:
            raise ValueError("wlasso recipe divides by the noise estimate; it must be > 0")
        return math.sqrt(K) / noise_estimate
    if decoder == "wsrlasso":
        return constant * math.sqrt(K)
    if decoder == "wladlasso":
        if practical:
            return 1.0
        if k is None or m is None or n is None:
            raise ValueError("wladlasso theory recipe needs k, m and n")
        if k < 1 or m < 1 or n < 2:
            raise ValueError("need k >= 1, m >= 1, n >= 2")
        return constant / math.sqrt((k / m) * math.log(n))
    raise ValueError(f"unknown decoder {decoder!r}; choose from {DECODERS}")


def recommended_m(s: int, kind: BasisKind, n: int) -> int:
    """``ceil(s**gamma * ln n)``."""
    if s < 1 or n < 2:
        raise ValueError("need s >= 1 and n >= 2")
    kind = BasisKind.parse(kind)
    return math.ceil(float(s) ** kind.gamma * math.log(n))


def theta(K: float, lam: float, H: float) -> float:
    """``sqrt(K + lam^2 H) / min(sqrt(K), lam sqrt(H))``; H is the corruption count."""
    if K <= 0 or lam <= 0 or H <= 0:
        raise ValueError("theta needs positive inputs")
    return math.sqrt(K + lam**2 * H) / min(math.sqrt(K), lam * math.sqrt(H))


def theta_minimizer(K: float, H: float) -> float:
    return math.sqrt(K / H)


def polylog_L(s: float, d: int, epsilon: float) -> float:
    if s < 2 or d < 1 or not 0 < epsilon < 1:
        raise ValueError("need s >= 2, d >= 1 and 0 < epsilon < 1")
    ls = math.log(s)
    return ls**2 * min(ls + d, math.log(2 * d) * ls) + ls * math.log(s / epsilon)


def parse_grid(text: str) -> np.ndarray:
    """Expand ``"a:step:b"`` to ``10 ** (a, a+step, ..., b)``.

    A comma-separated list of plain numbers is also accepted and returned as-is.
    """
    text = text.strip()
    if ":" not in text:
        vals = [float(t) for t in text.replace(",", " ").split()]
        if not vals:
            raise ValueError("empty parameter grid")
        return np.array(vals)
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like start:step:end, got {text!r}")
    a, step, b = (float(t) for t in parts)
    if step <= 0 or b < a:
        raise ValueError(f"bad grid {text!r}")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return 10.0 ** (a + step * np.arange(count))


@dataclass(frozen=True)
class CvSpec:
    """K-fold cross-validation setup: ``folds`` groups, ``repetitions`` random partitions."""

    folds: int
    repetitions: int
    grid: tuple
    decoder: str = "wsrlasso"
    metric: str = "l2sq"

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("need at least 2 folds")
        if self.repetitions < 1:
            raise ValueError("need at least 1 repetition")
        if len(self.grid) == 0:
            raise ValueError("empty parameter grid")
        if self.metric not in ("l2sq", "l1"):
            raise ValueError("metric must be 'l2sq' or 'l1'")
        object.__setattr__(self, "grid", tuple(float(p) for p in self.grid))


@dataclass
class CvResult:
    parameter: float
    errors: np.ndarray  # shape (repetitions, folds, len(grid))
    mean_errors: np.ndarray
    partitions: list


def random_partition(m: int, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Split ``range(m)`` into ``folds`` random groups of size floor(m/G) or floor(m/G)+1."""
    perm = rng.permutation(m)
    return [np.sort(g) for g in np.array_split(perm, folds)]


def fold_systems(A, y, fold):
    """Rescaled (training, validation) systems for one held-out fold."""
    m = A.shape[0]
    mask = np.zeros(m, dtype=bool)
    mask[fold] = True
    kv = mask.sum()
    sv = math.sqrt(m / kv)
    sr = math.sqrt(m / (m - kv))
    return (sr * A[~mask], sr * y[~mask]), (sv * A[mask], sv * y[mask])


Decoder = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def make_decoder(problem: DesignProblem, name: str, opts: SolverOptions = SolverOptions(), v=None) -> Decoder:
    """``(A, y, p) -> x_hat`` running decoder ``name`` with the problem's weights."""

    def run(A, y, p):
        sub = DesignProblem(problem.points[:0], A, y, problem.index_set, problem.kind, problem.weights)
        kind = DecoderKind(name, p, v)
        return solve(sub, kind, opts, norm=operator_norm(A)).x

    return run


def cross_validate(
    problem: DesignProblem,
    spec: CvSpec,
    rng: np.random.Generator,
    decoder: Optional[Decoder] = None,
    partitions: Optional[Sequence[Sequence[Sequence[int]]]] = None,
    opts: SolverOptions = SolverOptions(),
) -> CvResult:
    """Pick the grid parameter with the smallest mean validation error.

    ``decoder`` overrides the solver (any ``(A, y, p) -> x_hat``); ``partitions``
    fixes the folds for each repetition instead of drawing them from ``rng``.
    Ties go to the earliest grid entry.
    """
    A, y = problem.A, problem.y
    m = A.shape[0]
    if spec.folds > m:
        raise ValueError(f"cannot split {m} samples into {spec.folds} folds")
    if decoder is None:
        decoder = make_decoder(problem, spec.decoder, opts)
    T, G, P = spec.repetitions, spec.folds, len(spec.grid)
    errors = np.empty((T, G, P))
    used = []
    for t in range(T):
        if partitions is None:
            parts = random_partition(m, G, rng)
        else:
            parts = [np.asarray(f, dtype=int) for f in partitions[t]]
            if len(parts) != G:
                raise ValueError("partition has the wrong number of folds")
        used.append(parts)
        for g, fold in enumerate(parts):
            (Ar, yr), (Av, yv) = fold_systems(A, y, fold)
            for j, p in enumerate(spec.grid):
                r = Av @ decoder(Ar, yr, p) - yv
                errors[t, g, j] = float(r @ r) if spec.metric == "l2sq" else float(np.abs(r).sum())
    mean = errors.mean(axis=(0, 1))
    best = int(np.argmin(mean))
    return CvResult(spec.grid[best], errors, mean, used)
