import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import grid_search
from wl1approx.basis import DesignProblem, assemble, expansion, sample_measure
from wl1approx.indexsets import BasisKind, IndexSet, hyperbolic_cross, intrinsic_weights
from wl1approx.metrics import (
    RankDeficientError,
    ReferenceSolution,
    best_k_term_l1,
    l2_error,
    least_squares_reference,
    linf_surrogate,
    tail_Q,
    tail_term,
)

LEG, CHEB = BasisKind.LEGENDRE, BasisKind.CHEBYSHEV


def test_l2_error_examples():
    x = np.array([1.0, -2.0, 0.5])
    assert l2_error(x, x) == 0
    e = np.zeros(3)
    e[1] = 1
    assert l2_error(x + e, x) == 1
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(7), rng.standard_normal(7)
    assert l2_error(a, b) == pytest.approx(math.sqrt(sum((p - q) ** 2 for p, q in zip(a, b))), rel=1e-14)
    with pytest.raises(ValueError):
        l2_error(np.zeros(2), np.zeros(3))


def test_linf_surrogate_examples():
    u = np.array([1.0, 3.0, 2.0])
    x = np.array([0.2, 0.4, -1.0])
    assert linf_surrogate(x, x, u) == 0
    y = x.copy()
    y[1] += 0.25
    assert linf_surrogate(y, x, u) == pytest.approx(0.75, rel=1e-14)
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    assert linf_surrogate(a, b, u) == pytest.approx(sum(w * abs(p - q) for w, p, q in zip(u, a, b)), rel=1e-14)
    with pytest.raises(ValueError):
        linf_surrogate(a, b, u[:2])


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.integers(1, 20))
def test_l2_below_linf_surrogate(seed, n):
    rng = np.random.default_rng(seed)
    a, b, u = rng.standard_normal(n), rng.standard_normal(n), rng.uniform(1, 5, n)
    assert l2_error(a, b) <= linf_surrogate(a, b, u) * (1 + 1e-14)


def test_best_k_term_examples():
    e = np.array([3.0, -1.0, 2.0])
    assert best_k_term_l1(e, 3) == 0
    assert best_k_term_l1(e, 0) == 6
    assert best_k_term_l1(e, 1) == 3
    with pytest.raises(ValueError):
        best_k_term_l1(e, 4)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=15))
def test_best_k_term_monotone(e):
    vals = [best_k_term_l1(e, k) for k in range(len(e) + 1)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def one_by_one(a=1.0):
    return DesignProblem(np.zeros((1, 1)), np.array([[a]]), np.zeros(1), IndexSet.from_indices([(0,)]), LEG,
                         np.ones(1))


def test_tail_q_trivial_and_rank_deficient():
    assert tail_Q(one_by_one()) == (1.0, False)
    p = DesignProblem(np.zeros((2, 1)), np.array([[1.0], [0.0]]), np.zeros(2), IndexSet.from_indices([(0,)]),
                      LEG, np.ones(1))
    Q, flag = tail_Q(p)
    assert Q == math.inf and flag
    hc = hyperbolic_cross(2, 3)
    rows = np.vstack([np.eye(3)[:2], np.zeros((1, 3))])
    p = DesignProblem(np.zeros((3, 2)), rows, np.zeros(3), hc, LEG, np.ones(3))
    assert tail_Q(p) == (math.inf, True)


def test_tail_q_against_lapack():
    hc = IndexSet.from_indices(list(hyperbolic_cross(4, 16))[:200])
    assert len(hc) == 200
    rng = np.random.default_rng(2)
    p = assemble(LEG, hc, sample_measure(LEG, 4, 50, rng), np.zeros(50))
    Q, flag = tail_Q(p)
    sv = scipy.linalg.svd(math.sqrt(50 / 200) * p.A.T, compute_uv=False, lapack_driver="gesvd")
    expect = math.sqrt(np.sum(intrinsic_weights(LEG, hc) ** 2) / 200) / sv[49]
    assert not flag and math.isfinite(Q)
    assert Q == pytest.approx(expect, rel=1e-8)


def tail_instance():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3, 2))
    u = np.array([1.0, 1.5])
    p = DesignProblem(np.zeros((3, 1)), A, np.zeros(3), hyperbolic_cross(1, 2), LEG, u)
    return p, rng.standard_normal(3)


def test_tail_term_trivial_cases():
    p, e = tail_instance()
    assert tail_term(p, e, float(np.linalg.norm(e)), 3) == 0.0
    assert tail_term(p, e, 2 * float(np.linalg.norm(e)), 3) == 0.0
    assert tail_term(p, np.zeros(3), 0.0, 3) == 0.0


def test_tail_term_matches_grid_oracle_and_is_monotone():
    p, e = tail_instance()
    floor = np.linalg.norm(p.A @ np.linalg.lstsq(p.A, e, rcond=None)[0] - e)
    etas = floor + (np.linalg.norm(e) - floor) * np.array([0.2, 0.5, 0.8])
    vals = [tail_term(p, e, eta, 3) for eta in etas]
    _, best = grid_search("wqcbp", p.A, e, p.weights, etas[1], radius=5.0)
    assert vals[1] == pytest.approx(best / math.sqrt(3.0 ** 2), abs=1e-5)
    assert vals[0] >= vals[1] >= vals[2] > 0


def test_least_squares_reference_recovers_polynomial():
    hc = hyperbolic_cross(3, 6)
    c = np.random.default_rng(4).standard_normal(len(hc))
    ref = least_squares_reference(expansion(CHEB, hc, c), hc, CHEB, 20, np.random.default_rng(5))
    assert np.linalg.norm(ref.coefficients - c) <= 1e-10 * np.linalg.norm(c)
    assert ref.oversampling == 20
    assert ref.residual_norm < 1e-10


def test_least_squares_reference_constant_and_orthogonality():
    hc = hyperbolic_cross(2, 5)
    rng = np.random.default_rng(6)
    ref = least_squares_reference(lambda t: np.full(len(t), 2.5), hc, LEG, 20, rng)
    assert ref.coefficients[0] == pytest.approx(2.5, abs=1e-12)
    assert np.max(np.abs(ref.coefficients[1:])) < 1e-12
    f = lambda t: np.exp(t[:, 0]) * np.cos(t[:, 1])
    rng = np.random.default_rng(7)
    ref = least_squares_reference(f, hc, LEG, 20, rng)
    again = np.random.default_rng(7)
    pts = sample_measure(LEG, 2, 20 * len(hc), again)
    p = assemble(LEG, hc, pts, f(pts))
    assert np.max(np.abs(p.A.T @ (p.A @ ref.coefficients - p.y))) < 1e-10


def test_least_squares_reference_improves_with_oversampling():
    hc = hyperbolic_cross(2, 6)
    c = np.random.default_rng(8).standard_normal(len(hc))
    coarse = expansion(LEG, hc, c)
    f = lambda t: coarse(t) + 0.05 * np.sin(5 * t[:, 0]) * np.sin(5 * t[:, 1])
    err = []
    for os in (2, 20):
        e = [l2_error(least_squares_reference(f, hc, LEG, os, np.random.default_rng(s)).coefficients, c)
             for s in range(20)]
        err.append(np.mean(e))
    assert err[1] < err[0]


def test_least_squares_reference_rank_deficient():
    hc = hyperbolic_cross(1, 3)
    with pytest.raises(RankDeficientError):
        # a function sampled at a single repeated point cannot fix three coefficients
        least_squares_reference(lambda t: t[:, 0], hc, LEG, 1, _StuckRng())
    with pytest.raises(ValueError):
        least_squares_reference(lambda t: t[:, 0], hc, LEG, 0, np.random.default_rng(0))


class _StuckRng:
    def uniform(self, low, high, size):
        return np.full(size, 0.3)


def test_reference_round_trip(tmp_path):
    hc = hyperbolic_cross(3, 5)
    c = np.random.default_rng(9).standard_normal(len(hc))
    ref = ReferenceSolution(hc, c, 20, 1.25e-3)
    path = tmp_path / "ref.txt"
    ref.save(path)
    back = ReferenceSolution.load(path)
    assert back.index_set == hc
    np.testing.assert_array_equal(back.coefficients, c)
    assert (back.oversampling, back.residual_norm) == (20, 1.25e-3)
    line = path.read_text().splitlines()[2]
    idx, coef = line.split("\t")
    assert tuple(map(int, idx.split())) == list(hc)[1]
