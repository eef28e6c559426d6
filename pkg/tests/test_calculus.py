import math

import numpy as np
import pytest

from pextremal.calculus import (
    ScalarField,
    complex_hessian,
    complex_hessian_batch,
    domination_check,
    ma_density,
    ma_vanishing_scan,
    product_hessian_closed_form,
    prop31_check,
    strict_psh_check,
    tada_identity_check,
    wirtinger_1d,
)
from pextremal.calculus import _lq_partials
from pextremal.convex_body import ConvexBody
from pextremal.errors import (
    NotDifferentiableError,
    NotSmoothBodyError,
    PreconditionViolatedError,
    UntrustedDerivativeError,
)
from pextremal.grid import GridSpec
from pextremal.potentials import indicator_H, potential_u
from pextremal.product import lq_closed_form, p_extremal
from pextremal.univariate import Interval, UnitCircle

I = Interval(-1, 1)
SIGMA2 = ConvexBody.simplex(2)


def u0(z):
    return 0.5 * np.log1p(np.sum(np.abs(z) ** 2, axis=-1))


def u0_hessian(z):
    z = np.asarray(z, complex)
    s = 1 + np.sum(np.abs(z) ** 2)
    return 0.5 * (np.eye(len(z)) / s - np.outer(np.conj(z), z) / s ** 2)


def test_hessian_examples_d1():
    # quadratics are differentiated exactly by central differences, so a
    # coarse step only leaves round-off of order eps * |f| / h^2
    sq = lambda z: np.abs(z[..., 0]) ** 2
    assert complex_hessian(sq, [0.3 - 2j], h=1e-2) == pytest.approx(np.array([[1.0]]), abs=1e-10)
    assert complex_hessian(u0, [0]) == pytest.approx(np.array([[0.5]]), abs=1e-8)
    re_sq = lambda z: np.real(z[..., 0] ** 2)
    assert np.abs(complex_hessian(re_sq, [1.5 + 0.5j], h=1e-2)).max() <= 1e-10


def test_hessian_matches_analytic_u0():
    rng = np.random.default_rng(0)
    for d in (1, 2, 3):
        for _ in range(20):
            z = rng.normal(size=d) * 2 + 1j * rng.normal(size=d) * 2
            assert np.max(np.abs(complex_hessian(u0, z) - u0_hessian(z))) <= 1e-6


def test_hessian_is_hermitian_and_nearly_so_before_symmetrization():
    rng = np.random.default_rng(1)
    z = rng.normal(size=(50, 2)) + 1j * rng.normal(size=(50, 2))
    f = lambda w: potential_u(ConvexBody.polytope([[1, 0], [0, 1], [1, 1]]), w)
    raw = complex_hessian_batch(f, z, symmetrize=False)
    assert np.max(np.abs(raw - np.conj(np.swapaxes(raw, 1, 2)))) <= 1e-9
    sym = complex_hessian_batch(f, z)
    assert np.array_equal(sym, np.conj(np.swapaxes(sym, 1, 2)))


def test_fd_second_order_convergence():
    z = np.array([0.7 + 0.4j, -0.3 + 1.1j])
    exact = u0_hessian(z)
    errs = [np.max(np.abs(complex_hessian(u0, z, h) - exact)) for h in (4e-2, 2e-2)]
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_untrusted_region():
    f = ScalarField(u0, 1, smooth_region=lambda z: np.abs(z[..., 0]) > 1)
    with pytest.raises(UntrustedDerivativeError):
        complex_hessian(f, [0.5])
    assert complex_hessian(f, [2.0]).shape == (1, 1)


def test_ma_density_examples():
    assert ma_density(u0, [0, 0]) == pytest.approx(0.25, abs=1e-6)
    ph = lambda z: np.real(z[..., 0] * z[..., 1]) + np.imag(z[..., 0] ** 3)
    assert abs(ma_density(ph, [0.4 + 1j, -2.0])) <= 1e-8
    assert abs(ma_density(lambda z: indicator_H(SIGMA2, z), [2, 3])) <= 1e-6


def test_strict_psh_examples():
    rng = np.random.default_rng(2)
    pts = rng.uniform(-7, 7, (100, 2)) + 1j * rng.uniform(-7, 7, (100, 2))
    rep = strict_psh_check(lambda z: potential_u(SIGMA2, z), pts)
    assert rep.ok and rep.min_eigenvalue > 0
    rep = strict_psh_check(lambda z: indicator_H(SIGMA2, z), pts + 20, tol=1e-6)
    assert not rep.ok and abs(rep.min_eigenvalue) < 1e-6
    rep = strict_psh_check(lambda z: -np.sum(np.abs(z) ** 2, axis=-1), pts[:5])
    assert not rep.ok and rep.min_eigenvalue == pytest.approx(-1.0, abs=1e-6)
    assert np.all(np.diff(rep.eigenvalues, axis=1) >= 0)
    with pytest.raises(ValueError):
        strict_psh_check(u0, np.zeros((0, 2)))


def test_wirtinger_1d():
    f = lambda w: np.abs(w[..., 0]) ** 2 + np.real(w[..., 0])
    f0, fz, fzz = wirtinger_1d(f, np.array([1 + 2j]))
    assert fz[0] == pytest.approx(np.conj(1 + 2j) + 0.5, abs=1e-7)
    assert fzz[0] == pytest.approx(1.0, abs=1e-6)


def one(w):
    return np.ones(w.shape[:-1])


def test_log_sum_positivity_examples():
    u = lambda w: 1 + np.abs(w[..., 0]) ** 2
    v = lambda w: np.abs(w[..., 0] - 1) ** 2
    assert prop31_check(u, v, 2.0).all_positive
    same = prop31_check(u, u, 0.5)
    lap_u = prop31_check(u, one, 0.5)
    assert same.laplacian[0] > 0
    assert same.laplacian[0] == pytest.approx(4 / (1 + 0.25) ** 2, rel=1e-5)
    assert lap_u.numerator[0] > 0
    assert lap_u.extra_term[0] == pytest.approx(1.0, rel=1e-6)
    with pytest.raises(ValueError):
        prop31_check(u, v, 1.0)


def test_tada_examples():
    rng = np.random.default_rng(3)
    z = rng.normal(size=100) + 1j * rng.normal(size=100)
    u = lambda w: np.abs(w[..., 0]) ** 2 + 1
    v = lambda w: np.abs(w[..., 0] - 1j) ** 2 + 2
    rep = tada_identity_check(u, v, z)
    assert np.max(rep.relative) <= 1e-8 and np.min(rep.lhs) >= -1e-10
    rep = tada_identity_check(u, lambda w: 3.0 * u(w), z)
    assert np.max(np.abs(rep.lhs)) <= 1e-10
    rep = tada_identity_check(one, lambda w: np.abs(w[..., 0]) ** 2, z)
    assert np.allclose(rep.lhs, np.abs(z) ** 2, rtol=1e-6)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_lq_partials_against_fd(p):
    x, y, h = 0.7, 1.3, 1e-5
    g = lambda a, b: (a ** p + b ** p) ** (1 / p)
    d = _lq_partials(p, x, y)
    assert d["x"] == pytest.approx((g(x + h, y) - g(x - h, y)) / (2 * h), rel=1e-8)
    assert d["xx"] == pytest.approx((g(x + h, y) - 2 * g(x, y) + g(x - h, y)) / h ** 2, rel=1e-4)
    assert d["xy"] == pytest.approx(
        (g(x + h, y + h) - g(x + h, y - h) - g(x - h, y + h) + g(x - h, y - h)) / (4 * h * h), rel=1e-4)
    assert d["xx"] * d["yy"] - d["xy"] ** 2 == pytest.approx(0, abs=1e-12)


def test_product_hessian_examples():
    f = lambda w: lq_closed_form(2, [I, I], w)
    cf = product_hessian_closed_form(2, I, I, 2, 2j)
    fd = complex_hessian(f, [2, 2j])
    assert np.max(np.abs(cf - fd)) <= 1e-4 * np.max(np.abs(cf))
    assert abs(np.linalg.det(fd)) <= 1e-6
    assert abs(np.linalg.det(complex_hessian(f, [0, 2]))) <= 1e-6
    C = UnitCircle()
    g = lambda w: lq_closed_form(2, [C, C], w)
    fd = complex_hessian(g, [3, 5])
    x, y = math.log(3), math.log(5)
    want = _lq_partials(2.0, x, y)["xy"] * C.green_gradient(3) * np.conj(C.green_gradient(5))
    assert fd[0, 1] == pytest.approx(want, abs=1e-6)
    with pytest.raises(NotDifferentiableError):
        product_hessian_closed_form(2, I, I, 0.2, 0.3)
    with pytest.raises(NotSmoothBodyError):
        product_hessian_closed_form(1, I, I, 2, 2)


def test_vanishing_scan():
    grid = GridSpec.square(2, -3, 3, 13)
    rep = ma_vanishing_scan(ConvexBody.lq_ball(2, 2), [I, I], grid)
    assert rep.passed
    assert set(rep.regions) == {"out-out", "in-out", "out-in"}
    assert all(r["count"] > 0 for r in rep.regions.values())
    assert rep.to_dict()["passed"] is True
    with pytest.raises(NotSmoothBodyError):
        ma_vanishing_scan(ConvexBody.lq_ball(2, 1), [I, I], grid)


def test_vanishing_scan_excludes_product_set():
    inside = GridSpec.square(2, -0.5, 0.5, 3)
    inside = GridSpec(tuple(type(a)((-0.5, 0.5), (0.0, 0.0), 3, 2) for a in inside.axes))
    with pytest.raises(PreconditionViolatedError):
        ma_vanishing_scan(ConvexBody.lq_ball(2, 2), [I, I], inside)


def test_domination_pairs():
    rng = np.random.default_rng(4)
    torus = np.exp(2j * np.pi * rng.uniform(size=(200, 2)))
    grid10 = GridSpec.square(2, -10, 10, 9)
    H = lambda z: indicator_H(SIGMA2, z)
    assert domination_check(lambda z: H(z) - 1, H, torus, grid10)
    cube = np.stack([I.sample(rng, 200), I.sample(rng, 200)], axis=-1)
    lq2 = ConvexBody.lq_ball(2, 2)
    grid3 = GridSpec.square(2, -3, 3, 9)
    assert domination_check(lambda z: lq_closed_form(2, [I, I], z),
                            lambda z: p_extremal(lq2, [I, I], z), cube, grid3)
    with pytest.raises(PreconditionViolatedError):
        domination_check(lambda z: H(z) + 1, H, torus, grid10)
