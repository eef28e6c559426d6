"""The logarithmic indicator H_P and the strictly psh P-potential u_P."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .convex_body import (
    ConvexBody,
    axis_intercepts,
    extreme_points,
    outer_polytope_approximation,
    support_value,
)
from .errors import DimensionMismatchError, UnsupportedBodyError

DEFAULT_APPROX_LEVEL = 64


class Variant(str, enum.Enum):
    INDICATOR = "indicator"
    SMOOTH = "smooth"
    SPLIT_U = "split_u"
    SPLIT_V = "split_v"


def _as_points(z, dim: int) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1:] != (dim,):
        if dim == 1 and z.ndim == 0:
            return z.reshape(1)
        raise DimensionMismatchError(f"expected complex {dim}-vectors, got shape {z.shape}")
    return z


def _safe_log_abs(z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(np.abs(z)), -1e300)


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def monomial_modulus(J, z):
    """|z^J| = prod |z_k|^{j_k} with 0^0 = 1; exponents may be fractional."""
    J = np.asarray(J, dtype=float)
    z = _as_points(z, J.shape[-1])
    return _scalar(np.prod(np.abs(z) ** J, axis=-1))


def log_plus_moduli(z) -> np.ndarray:
    return np.log(np.maximum(np.abs(np.asarray(z, dtype=complex)), 1.0))


def indicator_H(body: ConvexBody, z, log_plus: bool = True):
    """H_P(z) = phi_P(log+|z_1|, ..., log+|z_d|).

    With ``log_plus=False`` the variant phi_P(log|z_1|, ..., log|z_d|) is
    returned instead; the two agree for lower sets such as Sigma and cubes.
    """
    z = _as_points(z, body.dim)
    x = log_plus_moduli(z) if log_plus else _safe_log_abs(z)
    return _scalar(support_value(body, x))


@lru_cache(maxsize=64)
def _resolved_extreme_points(body: ConvexBody, approx_level: int | None) -> np.ndarray:
    if body.is_polytope:
        return extreme_points(body)
    if body.q == 1 or math.isinf(body.q):
        return extreme_points(body.as_polytope())
    if approx_level is None:
        raise UnsupportedBodyError(
            "u_P of an l^q body needs approx_level (outer polytope approximation)")
    return extreme_points(outer_polytope_approximation(body, approx_level))


def resolve_polytope(body: ConvexBody, approx_level: int | None = None) -> ConvexBody:
    """The polytope whose extreme points define u_P for this body."""
    return ConvexBody.polytope(_resolved_extreme_points(body, approx_level))


def _half_log1p_sum_exp(a: np.ndarray) -> np.ndarray:
    """0.5 * log(1 + sum_k exp(a_k)) over the last axis, overflow-safe."""
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-1])
    m = np.maximum(a.max(axis=-1), 0.0)
    small = m == 0.0
    with np.errstate(over="ignore", under="ignore"):
        lo = np.log1p(np.exp(a).sum(axis=-1))
        hi = m + np.log(np.exp(-m) + np.exp(a - m[..., None]).sum(axis=-1))
    return 0.5 * np.where(small, lo, hi)


def potential_u(body: ConvexBody, z, approx_level: int | None = None):
    """u_P(z) = 1/2 log(1 + sum over Extr(P) of |z^J|^2), evaluated in log space.

    l^q bodies with 1 < q < inf are replaced by their outer polytope
    approximation at ``approx_level``.
    """
    ext = _resolved_extreme_points(body, approx_level)
    z = _as_points(z, body.dim)
    a = 2.0 * (_safe_log_abs(z) @ ext.T)
    return _scalar(_half_log1p_sum_exp(a))


def gap_bound(body: ConvexBody, approx_level: int | None = None) -> float:
    """0.5 * log(1 + m), m = number of extreme points."""
    return 0.5 * math.log1p(len(_resolved_extreme_points(body, approx_level)))


def gap_bound_check(body: ConvexBody, samples, approx_level: int | None = None,
                    log_plus: bool = True) -> float:
    """max over samples of |u_P - H_P|."""
    samples = _as_points(samples, body.dim)
    if samples.size == 0:
        raise ValueError("gap_bound_check needs at least one sample")
    u = np.atleast_1d(potential_u(body, samples, approx_level))
    h = np.atleast_1d(indicator_H(body, samples, log_plus=log_plus))
    return float(np.max(np.abs(u - h)))


def epsilon_split(body: ConvexBody, epsilon: float, z):
    """(u_eps, v_eps) with u_eps + v_eps = 1 + sum over Extr(P) of |z^J|^2.

    u_eps = 1 + (1 - eps) sum_j |z_j|^(2 a_j) with a_j the axis intercepts.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not body.is_polytope:
        raise UnsupportedBodyError("epsilon_split needs a polytope body")
    z = _as_points(z, body.dim)
    a = axis_intercepts(body)
    axis_part = np.sum(np.abs(z) ** (2 * a), axis=-1)
    mono = np.sum(np.prod(np.abs(z)[..., None, :] ** extreme_points(body), axis=-1) ** 2, axis=-1)
    u_eps = 1.0 + (1.0 - epsilon) * axis_part
    v_eps = mono - (1.0 - epsilon) * axis_part
    return _scalar(u_eps), _scalar(v_eps)


@dataclass(frozen=True)
class PotentialSpec:
    """A potential-type field attached to a body, evaluated by :meth:`__call__`."""

    body: ConvexBody
    variant: Variant = Variant.SMOOTH
    epsilon: float | None = None
    approx_level: int | None = None

    def __post_init__(self):
        split = self.variant in (Variant.SPLIT_U, Variant.SPLIT_V)
        if split != (self.epsilon is not None):
            raise ValueError("epsilon is required exactly for the epsilon-split variants")
        if split and not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    def __call__(self, z):
        if self.variant is Variant.INDICATOR:
            return indicator_H(self.body, z)
        if self.variant is Variant.SMOOTH:
            return potential_u(self.body, z, self.approx_level)
        u_eps, v_eps = epsilon_split(self.body, self.epsilon, z)
        return u_eps if self.variant is Variant.SPLIT_U else v_eps
