"""Error measures, least-squares reference fits and error-bound diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .basis import DesignProblem, assemble, sample_measure
from .indexsets import BasisKind, IndexSet, intrinsic_lower_sparsity
from .solvers import SolverOptions, solve, wqcbp


class RankDeficientError(RuntimeError):
    pass


@dataclass
class ReferenceSolution:
    index_set: IndexSet
    coefficients: np.ndarray
    oversampling: int
    residual_norm: float

    def save(self, path) -> None:
        """Two tab-separated columns: the multi-index, then its coefficient."""
        with open(path, "w") as fh:
            fh.write(f"# oversampling={self.oversampling} residual_norm={self.residual_norm:.17e}\n")
            for idx, c in zip(self.index_set, self.coefficients):
                fh.write(" ".join(map(str, idx)) + f"\t{c:.17e}\n")

    @classmethod
    def load(cls, path) -> "ReferenceSolution":
        oversampling, residual = 0, math.nan
        indices, coefs = [], []
        for line in Path(path).read_text().splitlines():
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "oversampling":
                        oversampling = int(val)
                    elif key == "residual_norm":
                        residual = float(val)
                continue
            if not line.strip():
                continue
            idx, coef = line.split("\t")
            indices.append(tuple(int(v) for v in idx.split()))
            coefs.append(float(coef))
        index_set = IndexSet.from_indices(indices)
        order = [index_set.position(i) for i in indices]
        c = np.empty(len(coefs))
        c[order] = coefs
        return cls(index_set, c, oversampling, residual)


def least_squares_reference(
    f: Callable[[np.ndarray], np.ndarray],
    index_set: IndexSet,
    kind: BasisKind,
    oversampling: int,
    rng: np.random.Generator,
) -> ReferenceSolution:
    """Least-squares fit of ``f`` on ``index_set`` from ``oversampling * n`` random samples."""
    if oversampling < 1:
        raise ValueError("oversampling must be >= 1")
    n = len(index_set)
    for _ in range(2):
        pts = sample_measure(kind, index_set.dimension, oversampling * n, rng)
        prob = assemble(kind, index_set, pts, f(pts))
        x, _, rank, _ = np.linalg.lstsq(prob.A, prob.y, rcond=None)
        if rank == n:
            res = float(np.linalg.norm(prob.A @ x - prob.y))
            if not math.isfinite(res):
                raise RankDeficientError("non-finite least-squares residual")
            return ReferenceSolution(index_set, x, oversampling, res)
    raise RankDeficientError(f"sampled design matrix has rank {rank} < {n} twice in a row")


def _same_length(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"coefficient vectors differ in length: {a.shape} vs {b.shape}")
    return a, b


def l2_error(x_hat, x_ref) -> float:
    a, b = _same_length(x_hat, x_ref)
    return float(np.linalg.norm(a - b))


def linf_surrogate(x_hat, x_ref, u) -> float:
    """Weighted l1 distance; bounds the sup-norm error of the in-span part."""
    a, b = _same_length(x_hat, x_ref)
    u = np.asarray(u, dtype=float)
    if u.shape != a.shape:
        raise ValueError("weights have the wrong length")
    return float(np.sum(u * np.abs(a - b)))


def tail_Q(problem: DesignProblem) -> tuple[float, bool]:
    """``sqrt(|Lambda|_u / n) / sigma_m(sqrt(m/n) A^T)``.

    Returns ``(Q, rank_deficient)``; ``Q`` is ``inf`` when the m-th singular
    value vanishes, which is always the case for ``m > n``.
    """
    m, n = problem.A.shape
    sv = np.linalg.svd(math.sqrt(m / n) * problem.A.T, compute_uv=False)
    if m > sv.size:
        return math.inf, True
    smin = sv[m - 1]
    tol = sv[0] * max(m, n) * np.finfo(float).eps if sv[0] > 0 else 0.0
    if smin <= tol:
        return math.inf, True
    wcard = float(np.sum(problem.weights**2))
    return math.sqrt(wcard / n) / smin, False


def tail_term(
    problem: DesignProblem,
    e: np.ndarray,
    eta: float,
    s: int,
    opts: SolverOptions = SolverOptions(),
) -> float:
    """``min ||z||_{1,u} / s^(gamma/2)`` over ``||A z - e||_2 <= eta``."""
    e = np.asarray(e, dtype=float)
    if eta >= np.linalg.norm(e):
        return 0.0
    sol = solve(problem.with_data(e), wqcbp(eta), opts)
    return sol.objective / math.sqrt(intrinsic_lower_sparsity(problem.kind, s, 1))


def best_k_term_l1(e, k: int) -> float:
    """l1 norm of ``e`` with its ``k`` largest-magnitude entries removed."""
    mags = np.sort(np.abs(np.asarray(e, dtype=float)))
    m = mags.size
    if not 0 <= k <= m:
        raise ValueError(f"k must lie in [0, {m}]")
    return float(mags[: m - k].sum())
