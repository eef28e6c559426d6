"""Finite-difference Wirtinger calculus on C^d.

Fields are callables taking complex arrays of shape (..., d) and returning
real arrays of shape (...).  Complex Hessians are built from central
differences in the 2d real coordinates via

    d^2 u / dz_j dzbar_k = 1/4 (u_{x_j x_k} + u_{y_j y_k} + i (u_{x_j y_k} - u_{y_j x_k})).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .convex_body import ConvexBody, dual_exponent
from .errors import (
    NotDifferentiableError,
    NotSmoothBodyError,
    PreconditionViolatedError,
    UntrustedDerivativeError,
)
from .grid import GridSpec
from .univariate import PlanarSet

DEFAULT_REL_STEP = 1e-4


@dataclass
class ScalarField:
    """A real field on C^d with an optional trust region for derivatives."""

    fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    smooth_region: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, z):
        return self.fn(z)


def as_field(f, dim: int) -> ScalarField:
    if isinstance(f, ScalarField):
        return f
    return ScalarField(f, dim)


def default_step(z: np.ndarray) -> np.ndarray:
    """h = 1e-4 * (1 + |z|) per point."""
    return DEFAULT_REL_STEP * (1.0 + np.linalg.norm(z, axis=-1))


def _prepare(f, z, h):
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    f = as_field(f, z.shape[-1])
    if f.smooth_region is not None:
        ok = np.asarray(f.smooth_region(z), dtype=bool)
        if not np.all(ok):
            raise UntrustedDerivativeError(
                f"{int((~ok).sum())} point(s) lie outside the field's smooth region")
    h = default_step(z) if h is None else np.broadcast_to(np.asarray(h, float), z.shape[:1])
    return f, z, np.asarray(h, dtype=float)


def _real_hessian(f, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Central-difference real Hessian in coordinates (x_1, y_1, ..., x_d, y_d)."""
    n, d = z.shape
    m = 2 * d
    basis = np.zeros((m, d), dtype=complex)
    basis[0::2, :] = np.eye(d)
    basis[1::2, :] = 1j * np.eye(d)
    pairs = list(itertools.combinations(range(m), 2))
    offsets = [np.zeros(d, complex)]
    for a in range(m):
        offsets += [basis[a], -basis[a]]
    for a, b in pairs:
        for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            offsets.append(sa * basis[a] + sb * basis[b])
    offsets = np.array(offsets)
    pts = z[:, None, :] + h[:, None, None] * offsets[None, :, :]
    vals = np.asarray(f(pts.reshape(-1, d)), dtype=float).reshape(n, len(offsets))
    h2 = h * h
    out = np.empty((n, m, m))
    f0 = vals[:, 0]
    for a in range(m):
        out[:, a, a] = (vals[:, 1 + 2 * a] - 2 * f0 + vals[:, 2 + 2 * a]) / h2
    base = 1 + 2 * m
    for i, (a, b) in enumerate(pairs):
        pp, pm, mp, mm = (vals[:, base + 4 * i + k] for k in range(4))
        val = (pp - pm - mp + mm) / (4 * h2)
        out[:, a, b] = val
        out[:, b, a] = val
    return out


def _complex_from_real(r: np.ndarray) -> np.ndarray:
    x = slice(0, None, 2)
    y = slice(1, None, 2)
    return 0.25 * (r[:, x, x] + r[:, y, y] + 1j * (r[:, x, y] - r[:, y, x]))


def complex_hessian_batch(f, z, h=None, symmetrize: bool = True) -> np.ndarray:
    """Complex Hessians at each row of z; returns an (N, d, d) complex array."""
    f, z, h = _prepare(f, z, h)
    hc = _complex_from_real(_real_hessian(f, z, h))
    if symmetrize:
        hc = 0.5 * (hc + np.conj(np.swapaxes(hc, -1, -2)))
    return hc


def complex_hessian(f, z, h=None) -> np.ndarray:
    """The Hermitian matrix (d^2 f / dz_j dzbar_k) at a single point z."""
    return complex_hessian_batch(f, np.atleast_1d(np.asarray(z, complex))[None, :], h)[0]


def ma_density(f, z, h=None):
    """Raw det of the complex Hessian (no dimensional constant)."""
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    hs = complex_hessian_batch(f, np.atleast_2d(z), h)
    det = np.linalg.det(hs).real
    return float(det[0]) if single else det


@dataclass
class PshReport:
    ok: bool
    min_eigenvalue: float
    argmin: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)


def strict_psh_check(f, points, h=None, tol: float = 0.0) -> PshReport:
    """True iff the smallest Hessian eigenvalue exceeds tol at every point."""
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    if points.shape[0] == 0:
        raise ValueError("strict_psh_check needs at least one point")
    eig = np.linalg.eigvalsh(complex_hessian_batch(f, points, h))
    mins = eig[:, 0]
    i = int(np.argmin(mins))
    return PshReport(bool(np.all(mins > tol)), float(mins[i]), points[i], eig)


def wirtinger_1d(f, z, h=None):
    """(f, f_z, f_{z zbar}) at points z of C by central differences."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    fz = lambda w: np.asarray(f(w[..., None]), dtype=float)
    h = DEFAULT_REL_STEP * (1 + np.abs(z)) if h is None else np.broadcast_to(h, z.shape)
    f0 = fz(z)
    fxp, fxm = fz(z + h), fz(z - h)
    fyp, fym = fz(z + 1j * h), fz(z - 1j * h)
    fx = (fxp - fxm) / (2 * h)
    fy = (fyp - fym) / (2 * h)
    lap = (fxp + fxm + fyp + fym - 4 * f0) / (h * h)
    return f0, 0.5 * (fx - 1j * fy), 0.25 * lap


@dataclass
class Prop31Report:
    numerator: np.ndarray
    extra_term: np.ndarray
    laplacian: np.ndarray

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.numerator > 0) and np.all(self.extra_term > 0)
                    and np.all(self.laplacian > 0))


def prop31_check(u, v, z, h=None) -> Prop31Report:
    """Numerator of (log(u+v))_{z zbar}, its cross term, and Delta log(u+v).

    u and v are fields on C (called with shape (..., 1) arrays) that must be
    positive at z.  numerator = (log-terms of u and v) + extra, where
    extra = u v_{z zbar} + v u_{z zbar} - 2 Re(u_z v_zbar).
    """
    u0, uz, uzz = wirtinger_1d(u, z, h)
    v0, vz, vzz = wirtinger_1d(v, z, h)
    if np.any(u0 <= 0) or np.any(v0 <= 0):
        raise ValueError("prop31_check needs u > 0 and v > 0 at every point")
    extra = u0 * vzz + v0 * uzz - 2 * np.real(uz * np.conj(vz))
    num = (u0 * uzz - np.abs(uz) ** 2) + (v0 * vzz - np.abs(vz) ** 2) + extra
    log_sum = lambda w: np.log(np.asarray(u(w), float) + np.asarray(v(w), float))
    _, _, lzz = wirtinger_1d(log_sum, z, h)
    return Prop31Report(num, extra, 4.0 * lzz)


@dataclass
class TadaReport:
    residual: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def relative(self) -> np.ndarray:
        return self.residual / (1.0 + np.abs(self.lhs))


def tada_identity_check(u, v, z, h=None) -> TadaReport:
    """|(u v_z - v u_z)(u v_zbar - v u_zbar) - [u^2 v_z v_zbar + v^2 u_z u_zbar - uv(u_z v_zbar + v_z u_zbar)]|.

    Both sides use the same finite-difference first derivatives.
    """
    u0, uz, _ = wirtinger_1d(u, z, h)
    v0, vz, _ = wirtinger_1d(v, z, h)
    uzb, vzb = np.conj(uz), np.conj(vz)
    lhs = (u0 * vz - v0 * uz) * (u0 * vzb - v0 * uzb)
    rhs = u0 ** 2 * vz * vzb + v0 ** 2 * uz * uzb - u0 * v0 * (uz * vzb + vz * uzb)
    return TadaReport(np.abs(lhs - rhs), lhs.real, rhs.real)


def _lq_partials(p: float, x, y):
    """First and second partials of (x^p + y^p)^(1/p) at x, y > 0."""
    n = (x ** p + y ** p) ** (1.0 / p)
    c = (p - 1.0) / n ** (2 * p - 1)
    return {
        "x": (x / n) ** (p - 1),
        "y": (y / n) ** (p - 1),
        "xx": c * x ** (p - 2) * y ** p,
        "yy": c * y ** (p - 2) * x ** p,
        "xy": -c * x ** (p - 1) * y ** (p - 1),
    }


def product_hessian_closed_form(q: float, E: PlanarSet, F: PlanarSet, z, w) -> np.ndarray:
    """2x2 complex Hessian of phi(V_E(z), V_F(w)) for phi the l^q' norm, off E x F.

    Uses the chain rule with (V_E)_{z zbar} = (V_F)_{w wbar} = 0 off the sets.
    """
    if not (q > 1 and math.isfinite(q)):
        raise NotSmoothBodyError("closed form needs 1 < q < inf")
    x, y = float(E.green(z)), float(F.green(w))
    if x == 0.0 and y == 0.0:
        raise NotDifferentiableError("phi is not differentiable at (V_E, V_F) = (0, 0)")
    ge = complex(E.green_gradient(z))
    gf = complex(F.green_gradient(w))
    d = _lq_partials(dual_exponent(q), x, y)
    h12 = d["xy"] * ge * np.conj(gf)
    return np.array([[d["xx"] * abs(ge) ** 2, h12],
                     [np.conj(h12), d["yy"] * abs(gf) ** 2]], dtype=complex)


@dataclass
class VanishingReport:
    max_abs_det: float
    location: np.ndarray | None
    regions: dict
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_abs_det <= self.tol

    def to_dict(self) -> dict:
        def enc(p):
            return None if p is None else [[c.real, c.imag] for c in p]
        return {
            "max_abs_det": self.max_abs_det,
            "location": enc(self.location),
            "tol": self.tol,
            "passed": self.passed,
            "regions": {k: {"count": r["count"], "max_abs_det": r["max_abs_det"],
                            "location": enc(r["location"])}
                        for k, r in self.regions.items()},
        }


REGION_NAMES = {("out", "out"): "out-out", ("in", "out"): "in-out", ("out", "in"): "out-in"}


def ma_vanishing_scan(body: ConvexBody, sets, grid: GridSpec, h=None,
                      tol: float = 1e-6) -> VanishingReport:
    """Max |det complex Hessian| of V_{P_q, E x F} over grid points off E x F.

    Points within a collar of 5h of a non-smooth locus are skipped; points of
    E x F itself are excluded.
    """
    from .product import LqField

    if body.is_polytope or body.q == 1:
        raise NotSmoothBodyError("support function is not smooth; need an l^q body with q > 1")
    sets = list(sets)
    if len(sets) != 2 or body.dim != 2:
        raise ValueError("ma_vanishing_scan works in d = 2")
    pts = grid.points()
    hh = default_step(pts) if h is None else np.full(len(pts), float(h))
    collar = 5 * hh
    lab = [sets[j].classify(pts[:, j], collar) for j in range(2)]
    region = np.full(len(pts), "", dtype=object)
    for key, name in REGION_NAMES.items():
        region[(lab[0] == key[0]) & (lab[1] == key[1])] = name
    keep = region != ""
    if not np.any(keep):
        raise PreconditionViolatedError("no grid point lies off E x F outside the collars")
    field_ = LqField(body.q, sets)
    dets = np.abs(ma_density(field_, pts[keep], hh[keep]))
    kept_pts, kept_reg = pts[keep], region[keep]
    regions = {}
    for name in REGION_NAMES.values():
        sel = kept_reg == name
        if np.any(sel):
            i = int(np.argmax(np.where(sel, dets, -1.0)))
            regions[name] = {"count": int(sel.sum()), "max_abs_det": float(dets[i]),
                             "location": kept_pts[i]}
        else:
            regions[name] = {"count": 0, "max_abs_det": 0.0, "location": None}
    i = int(np.argmax(dets))
    return VanishingReport(float(dets[i]), kept_pts[i], regions, tol)


def domination_check(u, v, support_samples, grid: GridSpec, tol: float = 1e-9) -> bool:
    """Test the domination conclusion u <= v on a grid, given u <= v on support samples."""
    s = np.atleast_2d(np.asarray(support_samples, dtype=complex))
    bad = np.asarray(u(s)) > np.asarray(v(s)) + tol
    if np.any(bad):
        raise PreconditionViolatedError(
            f"u > v + tol on {int(bad.sum())} support sample(s)")
    pts = grid.points()
    return bool(np.all(np.asarray(u(pts)) <= np.asarray(v(pts)) + tol))
