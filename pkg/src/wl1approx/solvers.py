"""Weighted l1 decoders solved by a single first-order primal-dual iteration.

Every decoder has the form ``min_z ||z||_{1,u} + F(A z)`` where ``F`` encodes
the data fit:

========== ==========================================
wqcbp      indicator of ``||w - y||_2 <= eta``
wlasso     ``lam * ||w - y||_2^2``
wsrlasso   ``lam * ||w - y||_2``
wladlasso  ``lam * sum_i v_i |w_i - y_i|``
========== ==========================================

The iteration alternates weighted soft-thresholding in the primal variable
with a proximal step on the convex conjugate ``F*`` (closed form for each
decoder), using over-relaxation ``theta = 1``, periodic restarts and an
adaptive primal/dual step ratio.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basis import DesignProblem

DECODERS = ("wqcbp", "wlasso", "wsrlasso", "wladlasso")


# restart schedule of the primal-dual loop
_RESTART_CHECK = 64
_RESTART_SUFFICIENT = 0.2
_RESTART_NECESSARY = 0.8
_RESTART_ARTIFICIAL = 0.36


class InfeasibleError(RuntimeError):
    """The WQCBP constraint set ``||A z - y||_2 <= eta`` is empty."""


@dataclass(frozen=True)
class DecoderKind:
    name: str
    param: float
    v: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.name not in DECODERS:
            raise ValueError(f"unknown decoder {self.name!r}; choose from {DECODERS}")
        if not math.isfinite(self.param):
            raise ValueError("decoder parameter must be finite")
        if self.name == "wqcbp":
            if self.param < 0:
                raise ValueError("eta must be >= 0")
        elif self.param <= 0:
            raise ValueError("lambda must be > 0")
        if self.v is not None:
            if self.name != "wladlasso":
                raise ValueError("fit weights v only apply to wladlasso")
            v = np.asarray(self.v, dtype=float)
            if np.any(v < 1) or not np.all(np.isfinite(v)):
                raise ValueError("fit weights v must be finite and >= 1")
            object.__setattr__(self, "v", v)

    def with_param(self, param: float) -> "DecoderKind":
        return DecoderKind(self.name, float(param), self.v)

    def __str__(self):
        return f"{self.name}({self.param:g})"


def wqcbp(eta: float) -> DecoderKind:
    return DecoderKind("wqcbp", float(eta))


def wlasso(lam: float) -> DecoderKind:
    return DecoderKind("wlasso", float(lam))


def wsrlasso(lam: float) -> DecoderKind:
    return DecoderKind("wsrlasso", float(lam))


def wladlasso(lam: float, v=None) -> DecoderKind:
    return DecoderKind("wladlasso", float(lam), v)


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 50_000
    tol: float = 1e-9
    feasibility_tol: float = 1e-8
    safety_factor: float = 0.99
    trace_every: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.tol > 0 and self.feasibility_tol > 0 and self.safety_factor > 0):
            raise ValueError("tolerances and safety factor must be positive")
        if self.safety_factor >= 1:
            raise ValueError("safety_factor must be < 1 for convergence")


@dataclass
class DecoderSolution:
    x: np.ndarray
    objective: float
    residual: np.ndarray
    iterations: int
    converged: bool
    duality_gap: float = math.nan
    trace: list = field(default_factory=list, repr=False)


def weighted_l1_norm(z, u) -> float:
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if z.shape != u.shape:
        raise ValueError(f"length mismatch: {z.shape} vs {u.shape}")
    return float(np.sum(u * np.abs(z)))


def prox_weighted_l1(z, u, step: float) -> np.ndarray:
    """Soft-thresholding: the proximal map of ``step * ||.||_{1,u}``."""
    if step <= 0:
        raise ValueError("step must be positive")
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - step * np.asarray(u, dtype=float), 0.0)


def operator_norm(A, rtol: float = 1e-6, max_iter: int = 10_000) -> float:
    """Largest singular value of ``A`` by power iteration on ``A^T A``."""
    A = np.asarray(A, dtype=float)
    if A.size == 0 or not np.any(A):
        return 0.0
    x = np.random.default_rng(0).standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ x)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = math.sqrt(nw)
        x = w / nw
        # Rayleigh estimates increase monotonically; stop well below rtol
        if abs(new - est) <= 1e-3 * rtol * new:
            return new
        est = new
    return est


def objective(kind: DecoderKind, z, problem: DesignProblem) -> float:
    r = problem.A @ z - problem.y
    reg = weighted_l1_norm(z, problem.weights)
    lam = kind.param
    if kind.name == "wqcbp":
        return reg
    if kind.name == "wlasso":
        return reg + lam * float(r @ r)
    if kind.name == "wsrlasso":
        return reg + lam * float(np.linalg.norm(r))
    v = np.ones_like(r) if kind.v is None else kind.v
    return reg + lam * float(np.sum(v * np.abs(r)))


def _project_ball(w, center, radius):
    d = w - center
    nd = np.linalg.norm(d)
    if nd <= radius:
        return w
    return center + d * (radius / nd)


def _dual_prox(kind: DecoderKind, q, sigma, y, v):
    """``prox_{sigma F*}(q)`` for the data-fit term of each decoder."""
    lam = kind.param
    if kind.name == "wqcbp":
        # Moreau: q - sigma * proj_{B(y, eta)}(q / sigma)
        return q - sigma * _project_ball(q / sigma, y, lam)
    if kind.name == "wlasso":
        return (q - sigma * y) / (1.0 + sigma / (2.0 * lam))
    if kind.name == "wsrlasso":
        w = q - sigma * y
        nw = np.linalg.norm(w)
        return w if nw <= lam else w * (lam / nw)
    bound = lam * v
    return np.clip(q - sigma * y, -bound, bound)


def _dual_value(kind: DecoderKind, p, problem: DesignProblem, v) -> float:
    """Dual objective at ``p`` rescaled into the dual-feasible set ``|A^T p| <= u``."""
    g = problem.A.T @ p
    ratio = np.max(np.abs(g) / problem.weights) if g.size else 0.0
    if ratio > 1.0:
        p = p / ratio
    y = problem.y
    if kind.name == "wqcbp":
        return -float(p @ y) - kind.param * float(np.linalg.norm(p))
    if kind.name == "wlasso":
        return -float(p @ y) - float(p @ p) / (4.0 * kind.param)
    return -float(p @ y)


def _check_feasible(problem: DesignProblem, eta: float, tol: float):
    A, y = problem.A, problem.y
    if A.shape[0] <= A.shape[1] and np.linalg.matrix_rank(A) == A.shape[0]:
        return
    x_ls = np.linalg.lstsq(A, y, rcond=None)[0]
    floor = float(np.linalg.norm(A @ x_ls - y))
    if floor > eta + tol:
        raise InfeasibleError(
            f"no z satisfies ||Az - y|| <= {eta:g}: least-squares residual floor is {floor:.3e}"
        )


def solve(
    problem: DesignProblem,
    kind: DecoderKind,
    opts: SolverOptions = SolverOptions(),
    norm: float | None = None,
) -> DecoderSolution:
    """Solve one weighted l1 decoder on ``problem`` starting from zero.

    Primal-dual hybrid gradient with restarts and an adaptive primal weight
    ``w``: steps are ``tau = c / (w ||A||)`` and ``sigma = c w / ||A||`` with
    ``c = opts.safety_factor``, so ``tau * sigma * ||A||^2 = c^2 < 1`` at every
    iteration. ``w`` starts at 1 and is re-estimated at each restart from how
    far the primal and dual iterates travelled. ``norm`` may pass a
    precomputed ``||A||_2`` when the same matrix is solved many times.
    """
    A, y, u = problem.A, problem.y, problem.weights
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite entries in A or y")
    m, n = A.shape
    v = None
    if kind.name == "wladlasso":
        v = np.ones(m) if kind.v is None else kind.v
        if v.shape != (m,):
            raise ValueError("fit weights v must have one entry per sample")
    x = np.zeros(n)
    p = np.zeros(m)
    trace = []
    if kind.name == "wqcbp":
        if np.linalg.norm(y) <= kind.param:
            # zero is feasible and has zero objective
            return _finish(kind, problem, x, p, 0, True, v, trace, opts)
        _check_feasible(problem, kind.param, opts.feasibility_tol)

    L = operator_norm(A) if norm is None else float(norm)
    if L == 0.0:
        return _finish(kind, problem, x, p, 0, True, v, trace, opts)
    c = opts.safety_factor / L
    w = 1.0

    def step(x, p):
        tau, sigma = c / w, c * w
        x_new = prox_weighted_l1(x - tau * (A.T @ p), u, tau)
        p_new = _dual_prox(kind, p + sigma * (A @ (2.0 * x_new - x)), sigma, y, v)
        return x_new, p_new

    def fixed_point_residual(x, p):
        x_new, p_new = step(x, p)
        return math.sqrt(w * np.sum((x_new - x) ** 2) + np.sum((p_new - p) ** 2) / w)

    # restart bookkeeping
    x_start, p_start = x.copy(), p.copy()
    x_sum, p_sum = np.zeros(n), np.zeros(m)
    since = 0
    r_start = math.inf
    r_prev = math.inf
    converged = False
    it = 0
    for it in range(1, opts.max_iterations + 1):
        x_new, p_new = step(x, p)
        dx = np.linalg.norm(x_new - x)
        dp = np.linalg.norm(p_new - p)
        x, p = x_new, p_new
        if opts.trace_every and it % opts.trace_every == 0:
            trace.append((it, objective(kind, x, problem), float(np.linalg.norm(A @ x - y)), c / w))
        if dx <= opts.tol * max(np.linalg.norm(x), 1e-300) and dp <= opts.tol * max(
            np.linalg.norm(p), 1e-300
        ):
            if kind.name != "wqcbp" or (
                np.linalg.norm(A @ x - y) - kind.param <= opts.feasibility_tol
            ):
                converged = True
                break
        since += 1
        x_sum += x
        p_sum += p
        if since % _RESTART_CHECK:
            continue
        x_avg, p_avg = x_sum / since, p_sum / since
        r_avg = fixed_point_residual(x_avg, p_avg)
        r_cur = fixed_point_residual(x, p)
        cand = (x_avg, p_avg, r_avg) if r_avg < r_cur else (x, p, r_cur)
        if math.isinf(r_start):
            r_start = cand[2] / _RESTART_SUFFICIENT
        r = cand[2]
        if (
            r <= _RESTART_SUFFICIENT * r_start
            or (r <= _RESTART_NECESSARY * r_start and r > r_prev)
            or since >= _RESTART_ARTIFICIAL * it
        ):
            x, p = cand[0].copy(), cand[1].copy()
            mx = np.linalg.norm(x - x_start)
            mp = np.linalg.norm(p - p_start)
            if mx > 1e-10 and mp > 1e-10:
                w = math.exp(0.5 * math.log(mp / mx) + 0.5 * math.log(w))
            x_start, p_start = x.copy(), p.copy()
            r_start = fixed_point_residual(x, p)
            x_sum[:] = 0.0
            p_sum[:] = 0.0
            since = 0
            r_prev = math.inf
        else:
            r_prev = r
    return _finish(kind, problem, x, p, it, converged, v, trace, opts)


def _finish(kind, problem, x, p, it, converged, v, trace, opts) -> DecoderSolution:
    residual = problem.A @ x - problem.y
    obj = objective(kind, x, problem)
    gap = math.nan
    if kind.name != "wqcbp" or np.linalg.norm(residual) <= kind.param + opts.feasibility_tol:
        gap = max(obj - _dual_value(kind, p, problem, v), 0.0)
    return DecoderSolution(x, obj, residual, it, converged, gap, trace)


def write_trace_csv(solution: DecoderSolution, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "objective", "residual_norm", "step"])
        w.writerows(solution.trace)
