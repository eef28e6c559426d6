"""Named invariant suites with measured margins, driven by a seeded generator.

Each suite returns a list of :class:`Check` records.  A check's margin is
``tol - measured`` for upper-bound checks and ``measured - tol`` for
lower-bound checks, so a check passes exactly when its margin is >= 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .calculus import (
    complex_hessian_batch,
    product_hessian_closed_form,
    prop31_check,
    strict_psh_check,
    tada_identity_check,
)
from .convex_body import ConvexBody, dual_exponent, support_value
from .potentials import gap_bound, gap_bound_check, indicator_H, potential_u
from .product import lq_closed_form, p_extremal, torus_extremal
from .univariate import NORMALIZATION_NOTE, Interval, PlanarSet, UnitCircle

SCHEMA = "pextremal/1"
SUITES = ("support-fn", "potential", "hessian", "product", "identities")


@dataclass
class Check:
    name: str
    measured: float
    tol: float
    kind: str = "max"  # "max": measured <= tol; "min": measured > tol

    @property
    def margin(self) -> float:
        return self.tol - self.measured if self.kind == "max" else self.measured - self.tol

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.measured):
            return False
        return self.measured <= self.tol if self.kind == "max" else self.measured > self.tol

    def to_dict(self) -> dict:
        out = asdict(self)
        out["margin"] = self.margin
        out["passed"] = self.passed
        return out


def random_points(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    """Points with |z_j| <= radius, uniform in modulus and argument."""
    r = radius * rng.random((n, dim))
    t = 2 * np.pi * rng.random((n, dim))
    return r * np.exp(1j * t)


def lq_dual_by_maximizer(x: np.ndarray, q: float) -> np.ndarray:
    """<x, y*> for the explicit maximiser y* of x.y over the l^q orthant piece."""
    x = np.maximum(x, 0.0)
    if q == 1:
        return x.max(axis=-1)
    if math.isinf(q):
        return x.sum(axis=-1)
    p = dual_exponent(q)
    norm = np.sum(x ** p, axis=-1) ** (1 / p)
    safe = np.where(norm > 0, norm, 1.0)
    y = (x / safe[..., None]) ** (p - 1)
    return np.where(norm > 0, np.sum(x * y, axis=-1), 0.0)


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def suite_support_fn(rng, n: int = 1000, **_) -> list[Check]:
    checks = [Check("lq2 at (3,4) equals 5",
                    abs(support_value(ConvexBody.lq_ball(2, 2), [3.0, 4.0]) - 5.0), 1e-12)]
    for q in (1, 1.5, 2, 3, math.inf):
        x = rng.exponential(1.0, (n, 3))
        got = support_value(ConvexBody.lq_ball(3, q), x)
        checks.append(Check(f"lq{q} closed form vs maximiser", _rel(got, lq_dual_by_maximizer(x, q)), 1e-12))
    body = ConvexBody.polytope([[1, 0], [0, 1], [1, 1]])
    x = rng.normal(size=(n, 2))
    t = rng.exponential(1.0, (n, 1))
    checks.append(Check("positive homogeneity", _rel(support_value(body, t * x),
                                                     t[:, 0] * support_value(body, x)), 1e-12))
    return checks


def suite_potential(rng, n: int = 100, **_) -> list[Check]:
    checks = []
    bodies = {"simplex": ConvexBody.simplex(2), "square": ConvexBody.polytope([[1, 0], [0, 1], [1, 1]])}
    for name, body in bodies.items():
        pts = random_points(rng, n, 2, 10.0)
        axis = random_points(rng, 10, 2, 10.0)
        axis[:, 0] = 0.0
        pts = np.vstack([pts, axis])
        rep = strict_psh_check(lambda z, b=body: potential_u(b, z), pts)
        checks.append(Check(f"{name}: min Hessian eigenvalue", rep.min_eigenvalue, 0.0, "min"))
        big = random_points(rng, 10 * n, 2, 1.0) * 10.0 ** rng.uniform(-6, 6, (10 * n, 2))
        checks.append(Check(f"{name}: |u_P - H_P| within 1/2 log(1+m)",
                            gap_bound_check(body, big), gap_bound(body)))
    return checks


def _u0(z):
    return 0.5 * np.log1p(np.sum(np.abs(z) ** 2, axis=-1))


def _u0_hessian(z):
    s = 1 + np.sum(np.abs(z) ** 2, axis=-1)
    eye = np.eye(z.shape[-1])
    outer = np.conj(z)[..., :, None] * z[..., None, :]
    return 0.5 * (eye / s[..., None, None] - outer / (s ** 2)[..., None, None])


def suite_hessian(rng, n: int = 100, **_) -> list[Check]:
    z = random_points(rng, n, 2, 3.0)
    fd = complex_hessian_batch(_u0, z)
    checks = [Check("u0 FD Hessian vs analytic", float(np.max(np.abs(fd - _u0_hessian(z)))), 1e-6)]
    for label, sets in (("interval", Interval(-1, 1)), ("circle", UnitCircle())):
        for q in (1.5, 2.0, 3.0):
            worst = 0.0
            pts = _smooth_points(rng, sets, n)
            field = lambda w, q=q, s=sets: lq_closed_form(q, [s, s], w)
            fd = complex_hessian_batch(field, pts)
            for k, (a, b) in enumerate(pts):
                cf = product_hessian_closed_form(q, sets, sets, a, b)
                worst = max(worst, float(np.max(np.abs(fd[k] - cf)) / max(np.max(np.abs(cf)), 1e-300)))
            checks.append(Check(f"closed-form Hessian q={q} {label}", worst, 1e-4))
    return checks


def _smooth_points(rng, pset: PlanarSet, n: int) -> np.ndarray:
    """Points of C^2 off the set's hull with both coordinates >= 0.25 from the set."""
    out = []
    while len(out) < n:
        z = random_points(rng, 4 * n, 2, 4.0)
        ok = np.ones(len(z), bool)
        for j in range(2):
            ok &= (pset.green(z[:, j]) > 0) & (pset.distance(z[:, j]) >= 0.25)
        out.extend(z[ok])
    return np.array(out[:n])


def suite_product(rng, n: int = 1000, body: ConvexBody | None = None,
                  sets: list | None = None, **_) -> list[Check]:
    body = ConvexBody.lq_ball(2, 2.0) if body is None else body
    sets = [Interval(-1, 1)] * body.dim if sets is None else sets
    z = random_points(rng, n, body.dim, 5.0)
    checks = []
    if not body.is_polytope:
        checks.append(Check(f"p_extremal vs lq closed form (q={body.q})",
                            _rel(p_extremal(body, sets, z), lq_closed_form(body.q, sets, z)), 1e-10))
    checks.append(Check("torus extremal equals H_P",
                        float(np.max(np.abs(torus_extremal(body, z) - indicator_H(body, z)))), 1e-12))
    checks.append(Check("p_extremal nonnegative", float(np.min(p_extremal(body, sets, z))), -1e-15, "min"))
    checks.append(Check("p_extremal vanishes on the product set",
                        float(np.max(np.abs(p_extremal(body, sets, np.stack(
                            [s.sample(rng, n) for s in sets], axis=-1))))), 1e-12))
    return checks


def suite_identities(rng, n: int = 1000, **_) -> list[Check]:
    a, b = rng.uniform(0.5, 2.0, (2, n))
    c1, c2 = random_points(rng, 2, n, 2.0)
    u = lambda w: a * (1 + np.abs(w[..., 0] - c1) ** 2)
    v = lambda w: b * (np.abs(w[..., 0] - c2) ** 2 + 1.0)
    z = random_points(rng, n, 1, 3.0)[:, 0]
    rep = tada_identity_check(u, v, z)
    p31 = prop31_check(u, v, z)
    return [
        Check("tada identity relative residual", float(np.max(rep.relative)), 1e-8),
        Check("tada LHS nonnegative", float(np.min(rep.lhs)), -1e-10, "min"),
        Check("log-sum numerator", float(np.min(p31.numerator)), 0.0, "min"),
        Check("log-sum extra term", float(np.min(p31.extra_term)), 0.0, "min"),
        Check("log-sum laplacian", float(np.min(p31.laplacian)), 0.0, "min"),
    ]


_RUNNERS = {
    "support-fn": suite_support_fn,
    "potential": suite_potential,
    "hessian": suite_hessian,
    "product": suite_product,
    "identities": suite_identities,
}


def run_suite(name: str, seed: int = 0, tolerances: dict | None = None, **kwargs) -> dict:
    """Run a named suite and return its JSON-ready report.

    ``tolerances`` maps check names to replacement tolerances.
    """
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    rng = np.random.default_rng(seed)
    checks = _RUNNERS[name](rng, **kwargs)
    for c in checks:
        if tolerances and c.name in tolerances:
            c.tol = float(tolerances[c.name])
    checks = [c.to_dict() for c in checks]
    return {
        "schema": SCHEMA,
        "suite": name,
        "seed": seed,
        "tolerance_overrides": dict(sorted((tolerances or {}).items())),
        "normalization": NORMALIZATION_NOTE,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }
