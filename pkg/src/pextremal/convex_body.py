"""Convex bodies P in the nonnegative orthant and their support functions.

Two kinds are supported: polytopes given by a generating vertex list (the
origin is always adjoined) and the orthant piece of the unit l^q ball.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .errors import ConeConditionError, DimensionMismatchError, UnsupportedBodyError

MEMBERSHIP_TOL = 1e-9
EXTREME_TOL = 1e-12
CONE_K_CAP = 10**6

# Large negative stand-in for log(0) so that 0 * log(0) evaluates to 0.
_NEG_BIG = -1e300


class BodyKind(str, enum.Enum):
    POLYTOPE = "polytope"
    LQ = "lq"


def dual_exponent(q: float) -> float:
    """Return q' with 1/q + 1/q' = 1 (q = 1 <-> q' = inf)."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if q == 1:
        return math.inf
    if math.isinf(q):
        return 1.0
    return q / (q - 1.0)


def lp_norm_positive(x: np.ndarray, p: float) -> np.ndarray:
    """l^p norm over the last axis, scaled to avoid overflow; x must be >= 0."""
    if math.isinf(p):
        return x.max(axis=-1)
    if p == 1:
        return x.sum(axis=-1)
    m = x.max(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    r = (x / safe[..., None]) ** p
    return np.where(m > 0, m * r.sum(axis=-1) ** (1.0 / p), 0.0)


@dataclass(frozen=True)
class ConvexBody:
    """A compact convex body P in (R^+)^d.

    Build instances with :meth:`polytope`, :meth:`lq_ball` or :meth:`simplex`.
    """

    kind: BodyKind
    dim: int
    vertices: tuple[tuple[float, ...], ...] = ()
    q: float | None = None

    @classmethod
    def polytope(cls, vertices) -> "ConvexBody":
        arr = np.atleast_2d(np.asarray(vertices, dtype=float))
        if arr.size == 0:
            raise ValueError("polytope needs at least one vertex")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("vertex coordinates must be finite and >= 0")
        verts = tuple(tuple(float(c) for c in row) for row in arr)
        return cls(BodyKind.POLYTOPE, arr.shape[1], verts)

    @classmethod
    def lq_ball(cls, dim: int, q: float) -> "ConvexBody":
        if dim < 1:
            raise ValueError("dim must be >= 1")
        q = float(q)
        if not q >= 1:
            raise ValueError(f"q must be >= 1, got {q}")
        return cls(BodyKind.LQ, dim, (), q)

    @classmethod
    def simplex(cls, dim: int, scale: float = 1.0) -> "ConvexBody":
        return cls.polytope(scale * np.eye(dim))

    @property
    def is_polytope(self) -> bool:
        return self.kind is BodyKind.POLYTOPE

    @cached_property
    def vertex_array(self) -> np.ndarray:
        if not self.is_polytope:
            raise UnsupportedBodyError("l^q bodies have no vertex list")
        return np.array(self.vertices, dtype=float).reshape(-1, self.dim)

    def as_polytope(self) -> "ConvexBody":
        """Exact polytope form; l^q bodies only for q in {1, inf}."""
        if self.is_polytope:
            return self
        if self.q == 1:
            return ConvexBody.simplex(self.dim)
        if math.isinf(self.q):
            corners = itertools.product((0.0, 1.0), repeat=self.dim)
            return ConvexBody.polytope([c for c in corners if any(c)])
        raise UnsupportedBodyError(
            f"l^q body with q={self.q} has infinitely many extreme points")

    def _check_dim(self, x: np.ndarray) -> None:
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(
                f"expected last axis of length {self.dim}, got {x.shape[-1]}")

    def to_dict(self) -> dict:
        if self.is_polytope:
            return {"kind": "polytope", "vertices": [list(v) for v in self.vertices]}
        q = "inf" if math.isinf(self.q) else self.q
        return {"kind": "lq", "d": self.dim, "q": q}

    @classmethod
    def from_dict(cls, desc: dict) -> "ConvexBody":
        kind = desc.get("kind")
        if kind == "polytope":
            return cls.polytope(desc["vertices"])
        if kind == "lq":
            q = desc["q"]
            q = math.inf if q in ("inf", "Infinity") else float(q)
            return cls.lq_ball(int(desc["d"]), q)
        if kind == "simplex":
            return cls.simplex(int(desc["d"]), float(desc.get("scale", 1.0)))
        raise ValueError(f"unknown body kind {kind!r}")


def support_value(body: ConvexBody, x) -> np.ndarray | float:
    """phi_P(x) = sup over P of <x, y>; vectorised over leading axes of x."""
    x = np.asarray(x, dtype=float)
    body._check_dim(x)
    if body.is_polytope:
        xs = np.maximum(x, _NEG_BIG)
        vals = xs @ body.vertex_array.T
        out = np.maximum(vals.max(axis=-1), 0.0)
    else:
        out = lp_norm_positive(np.maximum(x, 0.0), dual_exponent(body.q))
    return float(out) if out.ndim == 0 else out


def membership(body: ConvexBody, point, tol: float = MEMBERSHIP_TOL) -> bool:
    """Whether point lies in P.

    Polytopes: minimise the l1 residual of point - sum(lambda_i v_i) over
    lambda >= 0, sum(lambda) <= 1, and compare with tol.
    """
    p = np.asarray(point, dtype=float)
    body._check_dim(p)
    if not body.is_polytope:
        if np.any(p < -tol):
            return False
        pp = np.maximum(p, 0.0)
        if math.isinf(body.q):
            return bool(pp.max() <= 1 + tol)
        return bool(np.sum(pp ** body.q) <= 1 + tol)
    return _l1_residual(body.vertex_array, p) <= tol


def _l1_residual(gen: np.ndarray, p: np.ndarray) -> float:
    """min ||p - gen^T lam||_1 with lam >= 0, sum(lam) <= 1 (origin absorbs slack)."""
    m, d = gen.shape
    if m == 0:
        return float(np.abs(p).sum())
    # variables: lam (m), s_plus (d), s_minus (d)
    c = np.r_[np.zeros(m), np.ones(2 * d)]
    a_eq = np.c_[gen.T, np.eye(d), -np.eye(d)]
    a_ub = np.r_[np.ones(m), np.zeros(2 * d)][None, :]
    res = linprog(c, A_ub=a_ub, b_ub=[1.0], A_eq=a_eq, b_eq=p, bounds=(0, None),
                  method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"membership LP failed: {res.message}")
    lam = res.x[:m]
    # re-measure the residual from the coefficients themselves
    return float(np.abs(p - gen.T @ lam).sum())


def _dedupe_lex(points: np.ndarray, tol: float) -> np.ndarray:
    """Drop near-duplicates, keeping the lexicographically smallest representative."""
    if len(points) == 0:
        return points
    points = points[np.lexsort(points.T[::-1])]
    _, first = np.unique(np.round(points / tol), axis=0, return_index=True)
    kept = points[np.sort(first)]
    return kept


def extreme_points(body: ConvexBody) -> np.ndarray:
    """Extreme points of conv({0} U vertices) with the origin removed.

    Returned as an (m, d) array in lexicographic order.
    """
    if not body.is_polytope:
        body = body.as_polytope()
    v = body.vertex_array
    v = v[np.max(np.abs(v), axis=1) > EXTREME_TOL]
    v = _dedupe_lex(v, EXTREME_TOL)
    if len(v) == 0:
        return v.reshape(0, body.dim)
    d = body.dim
    if d == 1:
        return v[[np.argmax(v[:, 0])]]
    pts = np.vstack([np.zeros(d), v])
    if np.linalg.matrix_rank(pts, tol=1e-10) == d:
        try:
            hull = ConvexHull(pts)
            idx = sorted(i - 1 for i in hull.vertices if i != 0)
            out = v[idx]
            return out[np.lexsort(out.T[::-1])]
        except QhullError:
            pass
    # degenerate body: test each candidate against the hull of the others
    keep = []
    for i in range(len(v)):
        others = np.delete(v, i, axis=0)
        if _l1_residual(others, v[i]) > EXTREME_TOL:
            keep.append(i)
    return v[keep]


def axis_intercepts(body: ConvexBody) -> np.ndarray:
    """a_j = sup{t >= 0 : t e_j in P}.

    For a polytope in the orthant, P intersected with the j-th axis is the face
    {x_k = 0, k != j}, which is the hull of the generators lying on that axis.
    """
    if not body.is_polytope:
        return np.ones(body.dim)
    v = body.vertex_array
    out = np.zeros(body.dim)
    for j in range(body.dim):
        off = np.delete(v, j, axis=1)
        on_axis = np.all(off <= EXTREME_TOL, axis=1) if off.size else np.ones(len(v), bool)
        if np.any(on_axis):
            out[j] = v[on_axis, j].max()
    return out


def cone_condition(body: ConvexBody, k_cap: int = CONE_K_CAP) -> int:
    """Smallest positive integer k with Sigma contained in kP.

    Raises ConeConditionError when some axis intercept vanishes or k exceeds k_cap.
    """
    a = axis_intercepts(body)
    if np.any(a <= 0):
        raise ConeConditionError(
            f"axis intercepts {a.tolist()} include 0; Sigma is never inside kP")
    k = max(1, math.ceil(float(np.max(1.0 / a)) - 1e-9))
    if k > k_cap:
        raise ConeConditionError(f"smallest k = {k} exceeds cap {k_cap}")
    eye = np.eye(body.dim)
    # confirm with explicit membership of e_j / k, bumping once for round-off
    for kk in (k, k + 1):
        if all(membership(body, eye[j] / kk) for j in range(body.dim)):
            return kk
    raise ConeConditionError("membership test of e_j/k failed")


def direction_set(dim: int, n: int) -> np.ndarray:
    """Unit directions m/|m| for m in Z^dim_{>=0}, sum(m) = n.

    D_n is contained in D_{2n} bit-for-bit, so outer approximations nest.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if dim == 1:
        return np.ones((1, 1))
    combos = [c for c in itertools.product(range(n + 1), repeat=dim - 1) if sum(c) <= n]
    m = np.array([(*c, n - sum(c)) for c in combos], dtype=float)
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def _facet_halfspaces(body: ConvexBody) -> np.ndarray:
    pts = np.vstack([np.zeros(body.dim), body.vertex_array])
    hull = ConvexHull(pts)
    return hull.equations  # rows [normal, offset] with normal.x + offset <= 0


def outer_polytope_approximation(body: ConvexBody, n: int) -> ConvexBody:
    """Outer polytope P_n containing P, cut out by supporting halfspaces.

    Directions come from :func:`direction_set` (plus the facet normals of a
    polytope input), so P_2n is contained in P_n.
    """
    if n < 1:
        raise ValueError("approximation level n must be >= 1")
    d = body.dim
    a = axis_intercepts(body)
    if np.any(a <= 0):
        raise ConeConditionError("outer approximation needs positive axis intercepts")
    if d == 1:
        return ConvexBody.polytope([[a[0]]])
    dirs = direction_set(d, n)
    h = support_value(body, dirs)
    rows = [np.c_[dirs, -h], np.c_[-np.eye(d), np.zeros(d)]]
    if body.is_polytope:
        rows.append(_facet_halfspaces(body))
    halfspaces = np.vstack(rows)
    interior = np.full(d, 0.5 / np.sum(1.0 / a))
    hsi = HalfspaceIntersection(halfspaces, interior)
    verts = hsi.intersections
    verts = np.maximum(verts, 0.0)
    verts = verts[np.max(np.abs(verts), axis=1) > EXTREME_TOL]
    verts = _dedupe_lex(np.round(verts, 13), 1e-11)
    return ConvexBody.polytope(verts)
