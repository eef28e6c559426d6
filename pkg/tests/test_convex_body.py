import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pextremal.convex_body import (
    ConvexBody,
    axis_intercepts,
    cone_condition,
    direction_set,
    extreme_points,
    membership,
    outer_polytope_approximation,
    support_value,
)
from pextremal.errors import ConeConditionError, DimensionMismatchError, UnsupportedBodyError

SIGMA2 = ConvexBody.simplex(2)
SQUARE = ConvexBody.polytope([[1, 0], [0, 1], [1, 1]])
finite = st.floats(-1e3, 1e3, allow_nan=False)
vec2 = st.tuples(finite, finite).map(np.array)


def as_set(points):
    return {tuple(np.round(p, 12)) for p in np.asarray(points)}


@pytest.mark.parametrize("body,x,want", [
    (SIGMA2, (1, 2), 2.0),
    (ConvexBody.lq_ball(2, 2), (3, 4), 5.0),
    (SIGMA2, (-3, -1), 0.0),
    (ConvexBody.polytope([[2, 0], [0, 1]]), (1, 1), 2.0),
])
def test_support_value_examples(body, x, want):
    assert support_value(body, x) == pytest.approx(want, abs=1e-12)


def test_support_value_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        support_value(SIGMA2, [1.0, 2.0, 3.0])


def test_support_value_batched_shape():
    x = np.ones((4, 5, 2))
    assert support_value(SIGMA2, x).shape == (4, 5)


@pytest.mark.parametrize("q", [1, 1.5, 2, 3, math.inf])
def test_lq_support_against_brute_force_boundary_sampling(q):
    # oracle: max of x.y over a dense sample of the l^q quarter circle
    t = np.linspace(0, np.pi / 2, 20001)
    if math.isinf(q):
        y = np.array([[1.0, 1.0]])
    elif q == 1:
        y = np.array([[1.0, 0.0], [0.0, 1.0]])
    else:
        c, s = np.cos(t), np.sin(t)
        y = np.stack([c, s], -1) / ((c ** q + s ** q) ** (1 / q))[:, None]
    x = np.random.default_rng(1).exponential(size=(50, 2))
    brute = (x @ y.T).max(axis=1)
    assert np.allclose(support_value(ConvexBody.lq_ball(2, q), x), brute, rtol=1e-7)


@settings(max_examples=200, deadline=None)
@given(vec2, st.floats(0, 1e3))
def test_homogeneity(x, t):
    for body in (SIGMA2, SQUARE, ConvexBody.lq_ball(2, 3)):
        assert support_value(body, t * x) == pytest.approx(t * support_value(body, x), rel=1e-12, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(vec2, vec2)
def test_convexity_and_monotonicity(x, y):
    for body in (SQUARE, ConvexBody.lq_ball(2, 1.5)):
        mid = support_value(body, (x + y) / 2)
        assert mid <= (support_value(body, x) + support_value(body, y)) / 2 + 1e-9
        lo, hi = np.abs(np.minimum(x, y)), np.abs(np.maximum(x, y))
        assert support_value(body, np.minimum(lo, hi)) <= support_value(body, np.maximum(lo, hi)) + 1e-9


def test_body_monotonicity_and_positivity():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(1000, 2))
    assert np.all(support_value(SIGMA2, x) <= support_value(SQUARE, x) + 1e-15)
    assert support_value(SQUARE, [0.0, 0.0]) == 0.0
    assert np.all(support_value(SIGMA2, np.abs(x) + 1e-9) > 0)


def test_degenerate_real_hessian_of_lq_support():
    rng = np.random.default_rng(3)
    h = 1e-4
    for q in (1.5, 2.0, 3.0):
        body = ConvexBody.lq_ball(2, q)
        f = lambda p: support_value(body, p)
        pts = rng.uniform(0, 3, size=(100, 2))
        pts = pts[np.linalg.norm(pts, axis=1) >= 0.5]
        for p in pts:
            e1, e2 = np.array([h, 0]), np.array([0, h])
            fxx = f(p + e1) - 2 * f(p) + f(p - e1)
            fyy = f(p + e2) - 2 * f(p) + f(p - e2)
            fxy = (f(p + e1 + e2) - f(p + e1 - e2) - f(p - e1 + e2) + f(p - e1 - e2)) / 4
            assert abs(fxx * fyy - fxy ** 2) <= 1e-6


@pytest.mark.parametrize("body,want", [
    (SIGMA2, {(1.0, 0.0), (0.0, 1.0)}),
    (SQUARE, {(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)}),
    (ConvexBody.polytope([[1, 0], [2, 0], [0, 1]]), {(2.0, 0.0), (0.0, 1.0)}),
])
def test_extreme_points_examples(body, want):
    assert as_set(extreme_points(body)) == want


def test_extreme_points_reproduce_support_function():
    rng = np.random.default_rng(4)
    pts = rng.uniform(0, 1, size=(30, 3))
    body = ConvexBody.polytope(pts)
    ext = extreme_points(body)
    x = rng.normal(size=(1000, 3))
    via_ext = np.maximum(0, (x @ ext.T).max(axis=1))
    assert np.allclose(via_ext, support_value(body, x), rtol=0, atol=1e-12)
    assert len(ext) < len(pts)


def test_extreme_points_degenerate_body_uses_lp():
    ext = extreme_points(ConvexBody.polytope([[1, 0], [0.5, 0], [2, 0]]))
    assert as_set(ext) == {(2.0, 0.0)}


def test_extreme_points_rejects_round_lq():
    with pytest.raises(UnsupportedBodyError):
        extreme_points(ConvexBody.lq_ball(2, 2))


def test_extreme_points_of_cube_lq_body():
    assert as_set(extreme_points(ConvexBody.lq_ball(2, math.inf))) == {(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)}


@pytest.mark.parametrize("body,k", [
    (SIGMA2, 1),
    (ConvexBody.polytope([[0.5, 0], [0, 0.5]]), 2),
    (ConvexBody.polytope([[0.3, 0], [0, 1]]), 4),
    (ConvexBody.lq_ball(3, 2), 1),
])
def test_cone_condition(body, k):
    assert cone_condition(body) == k


def test_cone_condition_failure():
    with pytest.raises(ConeConditionError):
        cone_condition(ConvexBody.polytope([[1, 0]]))


def test_cone_condition_cap():
    with pytest.raises(ConeConditionError):
        cone_condition(ConvexBody.polytope([[1e-3, 0], [0, 1]]), k_cap=100)


@pytest.mark.parametrize("body,want", [
    (ConvexBody.lq_ball(2, 2), (1, 1)),
    (ConvexBody.simplex(3), (1, 1, 1)),
    (ConvexBody.polytope([[2, 0], [0, 1]]), (2, 1)),
    (ConvexBody.polytope([[1, 0], [1, 1], [0, 0.5]]), (1, 0.5)),
])
def test_axis_intercepts(body, want):
    assert np.allclose(axis_intercepts(body), want, atol=1e-12)


@pytest.mark.parametrize("body,p,want", [
    (SIGMA2, (0.3, 0.3), True),
    (SIGMA2, (0.7, 0.7), False),
    (ConvexBody.lq_ball(2, 2), (0.6, 0.8), True),
    (ConvexBody.lq_ball(2, 2), (0.61, 0.8), False),
    (SQUARE, (1.0, 1.0), True),
    (SQUARE, (-0.1, 0.5), False),
])
def test_membership(body, p, want):
    assert membership(body, p) is want


def test_outer_approximation_of_polytope_is_itself():
    for n in (1, 3, 8):
        assert as_set(extreme_points(outer_polytope_approximation(SIGMA2, n))) == {(1.0, 0.0), (0.0, 1.0)}
        assert as_set(extreme_points(outer_polytope_approximation(SQUARE, n))) == as_set(extreme_points(SQUARE))


def test_outer_approximation_dominates_and_converges():
    body = ConvexBody.lq_ball(2, 2)
    x = np.random.default_rng(5).normal(size=(1000, 2))
    exact = support_value(body, x)
    gaps = []
    for n in (4, 8, 16, 32, 64):
        approx = support_value(outer_polytope_approximation(body, n), x)
        assert np.all(approx >= exact - 1e-12)
        gaps.append(np.max(approx - exact))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_outer_approximation_nested_and_cone():
    body = ConvexBody.lq_ball(3, 2)
    p4, p8 = outer_polytope_approximation(body, 4), outer_polytope_approximation(body, 8)
    for v in extreme_points(p8):
        assert membership(p4, v)
    assert cone_condition(p4) == 1


def test_direction_sets_nest_bitwise():
    d4, d8 = direction_set(3, 4), direction_set(3, 8)
    assert as_set(d4) <= {tuple(np.round(r, 12)) for r in d8}
    assert np.allclose(np.linalg.norm(d8, axis=1), 1)


def test_outer_approximation_rejects_bad_level():
    with pytest.raises(ValueError):
        outer_polytope_approximation(SIGMA2, 0)


def test_descriptor_round_trip():
    for body in (SQUARE, ConvexBody.lq_ball(2, math.inf), ConvexBody.lq_ball(3, 1.5)):
        assert ConvexBody.from_dict(body.to_dict()) == body
    assert ConvexBody.from_dict({"kind": "lq", "d": 2, "q": "inf"}).q == math.inf
    with pytest.raises(ValueError):
        ConvexBody.from_dict({"kind": "ellipsoid"})
