"""Multi-index sets: lower sets, hyperbolic crosses and intrinsic weights.

Multi-indices are plain tuples of non-negative ints. An :class:`IndexSet`
fixes the column ordering of the design matrix: indices are sorted by the
tensor degree ``prod(i_l + 1)`` and ties are broken lexicographically.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

MultiIndex = tuple[int, ...]

# exhaustive lower-set enumeration is only offered below these sizes
MAX_ENUM_S = 12
MAX_ENUM_D = 6


class BasisKind(enum.Enum):
    LEGENDRE = "legendre"
    CHEBYSHEV = "chebyshev"

    @property
    def gamma(self) -> float:
        """Growth exponent of the intrinsic lower sparsity, K(s) ~ s**gamma."""
        if self is BasisKind.LEGENDRE:
            return 2.0
        return math.log(3) / math.log(2)

    @classmethod
    def parse(cls, value: "str | BasisKind") -> "BasisKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown basis {value!r}; expected 'legendre' or 'chebyshev'") from None


class EnumerationGuardError(ValueError):
    """Raised when exhaustive lower-set enumeration is requested above the size guard."""


def tensor_degree(index: Sequence[int]) -> int:
    return math.prod(i + 1 for i in index)


def order_key(index: Sequence[int]) -> tuple:
    return (tensor_degree(index), tuple(index))


@dataclass(frozen=True)
class IndexSet:
    """Ordered set of distinct multi-indices of a common dimension.

    Column ``j`` of any design matrix built on this set corresponds to
    ``indices[j]``.
    """

    dimension: int
    indices: tuple[MultiIndex, ...]
    _position: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        idx = tuple(sorted((tuple(int(v) for v in i) for i in self.indices), key=order_key))
        for i in idx:
            if len(i) != self.dimension:
                raise ValueError(f"index {i} does not have dimension {self.dimension}")
            if min(i) < 0:
                raise ValueError(f"index {i} has a negative entry")
        pos = {i: j for j, i in enumerate(idx)}
        if len(pos) != len(idx):
            raise ValueError("indices must be distinct")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "_position", pos)

    @classmethod
    def from_indices(cls, indices: Iterable[Sequence[int]], dimension: int | None = None) -> "IndexSet":
        idx = [tuple(int(v) for v in i) for i in indices]
        if dimension is None:
            if not idx:
                raise ValueError("dimension is required for an empty index set")
            dimension = len(idx[0])
        return cls(dimension, tuple(idx))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.indices)

    def __contains__(self, index) -> bool:
        return tuple(index) in self._position

    def position(self, index: Sequence[int]) -> int:
        return self._position[tuple(index)]

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int).reshape(len(self), self.dimension)

    def max_degree(self) -> int:
        return int(self.as_array().max()) if len(self) else 0

    def to_text(self) -> str:
        return "".join(" ".join(str(v) for v in i) + "\n" for i in self.indices)

    @classmethod
    def from_text(cls, text: str, dimension: int | None = None) -> "IndexSet":
        rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
        return cls.from_indices(([int(v) for v in r] for r in rows), dimension)


def hyperbolic_cross(d: int, s: int) -> IndexSet:
    """All ``i`` in N_0^d with ``prod(i_l + 1) <= s``.

    Built by depth-first recursion over coordinates carrying the remaining
    product budget, so the cost is proportional to the output size.
    """
    if d < 1 or s < 1:
        raise ValueError(f"hyperbolic cross needs d >= 1 and s >= 1, got d={d}, s={s}")
    out: list[MultiIndex] = []
    head = [0] * d

    def rec(coord: int, budget: int):
        if coord == d:
            out.append(tuple(head))
            return
        k = 0
        while k + 1 <= budget:
            head[coord] = k
            rec(coord + 1, budget // (k + 1))
            k += 1
        head[coord] = 0

    rec(0, s)
    return IndexSet(d, tuple(out))


def hyperbolic_cross_bound(d: int, s: int) -> float:
    """Upper bound ``min(2 s^3 4^d, e^2 s^(2 + log2 d))`` on the cross cardinality."""
    return min(2.0 * s**3 * 4.0**d, math.e**2 * s ** (2.0 + math.log2(d)))


def is_lower(indices: Iterable[Sequence[int]]) -> bool:
    members = {tuple(i) for i in indices}
    for i in members:
        for l, v in enumerate(i):
            if v > 0 and i[:l] + (v - 1,) + i[l + 1 :] not in members:
                return False
    return True


def intrinsic_weight(kind: BasisKind, index: Sequence[int]) -> float:
    """Sup norm of the orthonormal tensor basis function ``phi_index``."""
    kind = BasisKind.parse(kind)
    if kind is BasisKind.LEGENDRE:
        return math.prod(math.sqrt(2 * i + 1) for i in index)
    return 2.0 ** (sum(1 for i in index if i != 0) / 2.0)


def intrinsic_weight_sq(kind: BasisKind, index: Sequence[int]) -> int:
    """Squared intrinsic weight, an integer computed without rounding."""
    kind = BasisKind.parse(kind)
    if kind is BasisKind.LEGENDRE:
        return math.prod(2 * i + 1 for i in index)
    return 2 ** sum(1 for i in index if i != 0)


def intrinsic_weights(kind: BasisKind, index_set: IndexSet) -> np.ndarray:
    return np.array([intrinsic_weight(kind, i) for i in index_set], dtype=float)


def weighted_cardinality(indices: Iterable[Sequence[int]], kind: BasisKind) -> float:
    return float(sum(intrinsic_weight_sq(kind, i) for i in indices))


def _check_guard(s: int, d: int):
    if s > MAX_ENUM_S or d > MAX_ENUM_D:
        raise EnumerationGuardError(
            f"lower-set enumeration limited to s <= {MAX_ENUM_S}, d <= {MAX_ENUM_D} (got s={s}, d={d})"
        )


def _graded_key(index: MultiIndex) -> tuple:
    return (sum(index), index)


def iter_lower_sets(d: int, s: int) -> Iterator[tuple[MultiIndex, ...]]:
    """Yield every non-empty lower set in N_0^d with at most ``s`` elements.

    Each set is produced once: elements are added in increasing graded-lex
    order, and every prefix of a lower set in that order is itself lower.
    """
    _check_guard(s, d)
    if s < 1:
        return
    origin = (0,) * d
    units = [tuple(1 if k == l else 0 for k in range(d)) for l in range(d)]

    def addable(members: set, i: MultiIndex) -> bool:
        return all(
            i[:l] + (i[l] - 1,) + i[l + 1 :] in members for l in range(d) if i[l] > 0
        )

    def rec(chain: list, members: set):
        yield tuple(chain)
        if len(chain) == s:
            return
        last = _graded_key(chain[-1])
        cands = set()
        for i in chain:
            for e in units:
                c = tuple(a + b for a, b in zip(i, e))
                if c not in members and _graded_key(c) > last:
                    cands.add(c)
        for c in sorted(cands, key=_graded_key):
            if addable(members, c):
                chain.append(c)
                members.add(c)
                yield from rec(chain, members)
                members.discard(c)
                chain.pop()

    yield from rec([origin], {origin})


def intrinsic_lower_sparsity(kind: BasisKind, s: int, d: int, mode: str = "surrogate") -> float:
    """K(s): largest weighted cardinality of a lower set with at most ``s`` elements.

    ``mode="surrogate"`` returns the upper bound ``s**gamma``; ``mode="exact"``
    enumerates lower sets (guarded).
    """
    kind = BasisKind.parse(kind)
    if s < 1 or d < 1:
        raise ValueError("s and d must be positive")
    if mode == "surrogate":
        return float(s) ** kind.gamma
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    _check_guard(s, d)
    sq = {}

    def w2(i):
        if i not in sq:
            sq[i] = intrinsic_weight_sq(kind, i)
        return sq[i]

    return float(max(sum(w2(i) for i in S) for S in iter_lower_sets(d, s)))


def best_lower_s_term(z: np.ndarray, index_set: IndexSet, s: int, kind: BasisKind) -> float:
    """Best s-term error of ``z`` over lower supports, in the weighted l1 norm.

    Exhaustive; meant as a test oracle. Lower sets leaving ``index_set`` carry
    zero coefficients outside it. ``s = 0`` means the empty support.
    """
    kind = BasisKind.parse(kind)
    z = np.asarray(z, dtype=float)
    if z.shape != (len(index_set),):
        raise ValueError("z must have one entry per index")
    mags = np.abs(z) * intrinsic_weights(kind, index_set)
    total = float(mags.sum())
    if s == 0:
        return total
    _check_guard(s, index_set.dimension)
    best = 0.0
    for S in iter_lower_sets(index_set.dimension, s):
        kept = sum(mags[index_set.position(i)] for i in S if i in index_set)
        best = max(best, kept)
    return max(total - best, 0.0)


def random_lower_set(d: int, size: int, rng: np.random.Generator) -> tuple[MultiIndex, ...]:
    """Grow a lower set from the origin by repeatedly adding a uniformly chosen addable index."""
    if size < 1:
        raise ValueError("size must be >= 1")
    members = [(0,) * d]
    have = set(members)
    while len(members) < size:
        cands = sorted(
            {
                c
                for i in members
                for l in range(d)
                for c in [i[:l] + (i[l] + 1,) + i[l + 1 :]]
                if c not in have
                and all(c[:k] + (c[k] - 1,) + c[k + 1 :] in have for k in range(d) if c[k] > 0)
            },
            key=order_key,
        )
        pick = cands[int(rng.integers(len(cands)))]
        members.append(pick)
        have.add(pick)
    return tuple(sorted(members, key=order_key))
