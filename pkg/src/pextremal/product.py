"""P-extremal functions of product sets E_1 x ... x E_d."""

from __future__ import annotations

import math

import numpy as np

from .convex_body import ConvexBody, cone_condition, dual_exponent, support_value
from .errors import DimensionMismatchError
from .potentials import _as_points, _scalar, indicator_H
from .univariate import PlanarSet, UnitCircle


def factor_greens(sets, z) -> np.ndarray:
    """Stack (V_{E_1}(z_1), ..., V_{E_d}(z_d)) along the last axis."""
    z = _as_points(z, len(sets))
    return np.stack([s.green(z[..., j]) for j, s in enumerate(sets)], axis=-1)


def p_extremal(body: ConvexBody, sets, z, check_cone: bool = True):
    """V_{P, E_1 x ... x E_d}(z) = phi_P(V_{E_1}(z_1), ..., V_{E_d}(z_d))."""
    sets = list(sets)
    if len(sets) != body.dim:
        raise DimensionMismatchError(f"body has dim {body.dim} but {len(sets)} factor sets given")
    if check_cone:
        cone_condition(body)
    return _scalar(support_value(body, factor_greens(sets, z)))


def torus_extremal(body: ConvexBody, z):
    """V_{P, T^d}, computed as the product formula with unit-circle factors."""
    return p_extremal(body, [UnitCircle()] * body.dim, z)


def lq_closed_form(q: float, sets, z):
    """[sum_j V_{E_j}(z_j)^q']^(1/q') with the q = 1 <-> q' = inf convention."""
    if not q >= 1:
        raise ValueError(f"q must be >= 1, got {q}")
    v = factor_greens(list(sets), z)
    if q == 1:
        out = v.max(axis=-1)
    elif math.isinf(q):
        out = v.sum(axis=-1)
    else:
        p = dual_exponent(q)
        out = np.linalg.norm(v, ord=p, axis=-1)
    return _scalar(out)


class ProductField:
    """p_extremal as a callable field on C^d (for the calculus routines)."""

    def __init__(self, body: ConvexBody, sets):
        self.body = body
        self.sets = list(sets)
        self.dim = body.dim
        cone_condition(body)

    def __call__(self, z):
        return p_extremal(self.body, self.sets, z, check_cone=False)


class LqField:
    """lq_closed_form(q, sets, .) as a callable field."""

    def __init__(self, q: float, sets):
        self.q = q
        self.sets = list(sets)
        self.dim = len(self.sets)

    def __call__(self, z):
        return lq_closed_form(self.q, self.sets, z)
