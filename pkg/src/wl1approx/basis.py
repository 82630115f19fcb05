"""Orthonormal tensor Legendre / Chebyshev polynomials, sampling and design matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .indexsets import BasisKind, IndexSet, intrinsic_weights


def legendre_table(t: np.ndarray, max_degree: int) -> np.ndarray:
    """Orthonormal Legendre values, shape ``t.shape + (max_degree + 1,)``.

    Normalised w.r.t. the uniform probability measure on [-1, 1]: the classical
    three-term recurrence is run on unnormalised polynomials and column ``k`` is
    then scaled by ``sqrt(2k + 1)``.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (max_degree + 1,))
    out[..., 0] = 1.0
    if max_degree >= 1:
        out[..., 1] = t
    for k in range(1, max_degree):
        out[..., k + 1] = ((2 * k + 1) * t * out[..., k] - k * out[..., k - 1]) / (k + 1)
    out *= np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0)
    return out


def chebyshev_table(t: np.ndarray, max_degree: int) -> np.ndarray:
    """Orthonormal Chebyshev values (``1`` and ``sqrt(2) cos(k arccos t)``) via the recurrence."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (max_degree + 1,))
    out[..., 0] = 1.0
    if max_degree >= 1:
        out[..., 1] = t
    for k in range(1, max_degree):
        out[..., k + 1] = 2.0 * t * out[..., k] - out[..., k - 1]
    out[..., 1:] *= np.sqrt(2.0)
    return out


def univariate_table(kind: BasisKind, t: np.ndarray, max_degree: int) -> np.ndarray:
    kind = BasisKind.parse(kind)
    if kind is BasisKind.LEGENDRE:
        return legendre_table(t, max_degree)
    return chebyshev_table(t, max_degree)


def eval_basis(kind: BasisKind, index: Sequence[int], t: Sequence[float]) -> float:
    """phi_index(t) for a single multi-index and point."""
    index = tuple(index)
    t = np.asarray(t, dtype=float)
    if t.shape != (len(index),):
        raise ValueError("point and index dimensions differ")
    vals = univariate_table(kind, t, max(index) if index else 0)
    return float(np.prod(vals[np.arange(len(index)), index]))


def basis_matrix(kind: BasisKind, index_set: IndexSet, points: np.ndarray) -> np.ndarray:
    """Unscaled matrix ``B[i, j] = phi_{index_j}(points[i])``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != index_set.dimension:
        raise ValueError(
            f"points have dimension {points.shape[1]}, index set has {index_set.dimension}"
        )
    idx = index_set.as_array()
    tab = univariate_table(kind, points, index_set.max_degree())  # (m, d, p+1)
    B = np.ones((points.shape[0], len(index_set)))
    for l in range(index_set.dimension):
        B *= tab[:, l, idx[:, l]]
    return B


def sample_measure(kind: BasisKind, d: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``m`` i.i.d. points from the orthogonality measure, shape ``(m, d)``.

    Uniform for Legendre; arcsine law ``cos(pi U)`` for Chebyshev. Endpoints
    are redrawn so every coordinate lies strictly inside (-1, 1).
    """
    kind = BasisKind.parse(kind)
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    if kind is BasisKind.LEGENDRE:
        pts = rng.uniform(-1.0, 1.0, size=(m, d))
    else:
        pts = np.cos(np.pi * rng.uniform(0.0, 1.0, size=(m, d)))
    bad = np.abs(pts) >= 1.0
    while bad.any():
        pts[bad] = sample_measure(kind, 1, int(bad.sum()), rng)[:, 0]
        bad = np.abs(pts) >= 1.0
    return pts


@dataclass(frozen=True)
class DesignProblem:
    """Scaled linear system ``y = A x + e`` on a fixed index set.

    ``A[i, j] = phi_{index_j}(points[i]) / sqrt(m)`` and ``y = f(points) / sqrt(m)``.
    """

    points: np.ndarray
    A: np.ndarray
    y: np.ndarray
    index_set: IndexSet
    kind: BasisKind
    weights: np.ndarray

    def __post_init__(self):
        # read-only float arrays are shared, anything else is copied and frozen
        for name in ("points", "A", "y", "weights"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.flags.writeable:
                arr = arr.copy()
                arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def with_data(self, y: np.ndarray) -> "DesignProblem":
        """Same samples and matrix, different (already scaled) right-hand side."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.m,):
            raise ValueError("y has the wrong length")
        return DesignProblem(self.points, self.A, y, self.index_set, self.kind, self.weights)

    def dump(self) -> str:
        """Row-major plain-text dump of ``A`` then ``y`` with 17 significant digits."""
        lines = [f"# m={self.m} n={self.n} kind={self.kind.value}"]
        lines += [" ".join(f"{v:.16e}" for v in row) for row in self.A]
        lines.append("# y")
        lines += [f"{v:.16e}" for v in self.y]
        return "\n".join(lines) + "\n"


def assemble(
    kind: BasisKind,
    index_set: IndexSet,
    points: np.ndarray,
    values: np.ndarray,
) -> DesignProblem:
    kind = BasisKind.parse(kind)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float).reshape(-1)
    m = points.shape[0]
    if m < 1:
        raise ValueError("need at least one sample")
    if values.shape[0] != m:
        raise ValueError(f"{m} points but {values.shape[0]} values")
    scale = 1.0 / np.sqrt(m)
    A = basis_matrix(kind, index_set, points) * scale
    return DesignProblem(points, A, values * scale, index_set, kind, intrinsic_weights(kind, index_set))


def sample_problem(
    f: Callable[[np.ndarray], np.ndarray],
    kind: BasisKind,
    index_set: IndexSet,
    m: int,
    rng: np.random.Generator,
) -> DesignProblem:
    """Draw ``m`` points, evaluate ``f`` row-wise and assemble the noiseless system."""
    pts = sample_measure(kind, index_set.dimension, m, rng)
    return assemble(kind, index_set, pts, f(pts))


def expansion(kind: BasisKind, index_set: IndexSet, coefficients: np.ndarray) -> Callable:
    """Callable evaluating ``sum_j c_j phi_{index_j}`` at rows of a point array."""
    c = np.asarray(coefficients, dtype=float)

    def f(points):
        return basis_matrix(kind, index_set, points) @ c

    return f
