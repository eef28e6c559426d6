"""Monge-Ampere masses of mollified fields on grids.

A field is Gaussian-mollified (width = smoothing, per complex coordinate),
its complex Hessian is taken by central differences at interior grid nodes,
and the density d! 4^d det(u_{j kbar}) is integrated cell by cell.  For d = 1
that density is the Laplacian, so Delta log|z| = 2 pi delta_0 and every
equilibrium measure has mass 2 pi; for a product set the Monge-Ampere mass of
V_{P, E_1 x ... x E_d} is d! vol(P) (2 pi)^d.

Gaussian convolution is done by streaming over the first real axis so only
one padded slab of field values is held in memory at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarseError, NotSmoothBodyError, PreconditionViolatedError
from .grid import GridSpec
from .univariate import NORMALIZATION_NOTE

TRUNCATE = 4.0
_SLAB_POINTS = 1 << 21


@dataclass
class MassReport:
    total: float
    cell_masses: np.ndarray = field(repr=False)
    smoothing: float
    grid: GridSpec
    cell_axes: list = field(repr=False)
    normalization: str = NORMALIZATION_NOTE

    @property
    def dim(self) -> int:
        return self.grid.dim

    def marginal(self, keep=(0, 2)) -> np.ndarray:
        """Sum cell masses over all real axes not in `keep`."""
        drop = tuple(a for a in range(self.cell_masses.ndim) if a not in keep)
        return self.cell_masses.sum(axis=drop)

    def heatmap(self):
        """(x, y, mass) arrays: the cells for d = 1, the (Re z_1, Re z_2) marginal for d = 2."""
        keep = (0, 1) if self.dim == 1 else (0, 2)
        m = self.marginal(keep)
        x, y = np.meshgrid(self.cell_axes[keep[0]], self.cell_axes[keep[1]], indexing="ij")
        return x.ravel(), y.ravel(), m.ravel()

    def fraction_within(self, distance_fn, radius: float) -> float:
        """Share of total mass in cells whose centre lies within radius (via distance_fn)."""
        mesh = np.meshgrid(*self.cell_axes, indexing="ij")
        z = np.stack([mesh[2 * k] + 1j * mesh[2 * k + 1] for k in range(self.dim)], axis=-1)
        near = distance_fn(z) <= radius
        return float(self.cell_masses[near].sum() / self.total)

    def to_dict(self) -> dict:
        x, y, m = self.heatmap()
        out = {
            "schema": "pextremal/1",
            "total": self.total,
            "normalization": self.normalization,
            "smoothing": self.smoothing,
            "grid": self.grid.to_dict(),
        }
        if self.dim == 1:
            out["shape"] = list(self.cell_masses.shape)
            out["cells"] = self.cell_masses.ravel().tolist()
        else:
            out["cells_kind"] = "marginal over (Re z_1, Re z_2)"
            out["shape"] = [len(self.cell_axes[0]), len(self.cell_axes[2])]
            out["cells"] = m.tolist()
        return out


def gaussian_weights(sigma_px: float, truncate: float = TRUNCATE) -> np.ndarray:
    r = int(math.ceil(truncate * sigma_px))
    k = np.arange(-r, r + 1, dtype=float)
    w = np.exp(-0.5 * (k / sigma_px) ** 2)
    return w / w.sum()


def _valid_conv(arr: np.ndarray, w: np.ndarray, axis: int) -> np.ndarray:
    """Correlate along axis keeping only fully supported outputs (fixed summation order)."""
    r = len(w) // 2
    n = arr.shape[axis] - 2 * r
    out = np.zeros(arr.shape[:axis] + (n,) + arr.shape[axis + 1:])
    for k, wk in enumerate(w):
        out += wk * np.take(arr, np.arange(k, k + n), axis=axis)
    return out


def mollify_on_grid(f, grid: GridSpec, smoothing: float, truncate: float = TRUNCATE) -> np.ndarray:
    """Gaussian convolution of f sampled on grid nodes, shape grid.shape."""
    steps = grid.steps
    axes = grid.real_axes()
    ws = [gaussian_weights(smoothing / s, truncate) for s in steps]
    rs = [len(w) // 2 for w in ws]
    padded = [np.concatenate([a[0] - s * np.arange(r, 0, -1), a, a[-1] + s * np.arange(1, r + 1)])
              for a, s, r in zip(axes, steps, rs)]
    d = grid.dim
    slab_shape = tuple(len(p) for p in padded[1:])
    slab_size = int(np.prod(slab_shape)) if slab_shape else 1
    rows = max(1, _SLAB_POINTS // max(slab_size, 1))
    n0 = len(padded[0])
    buf = np.empty((n0,) + tuple(len(a) for a in axes[1:]))
    rest = np.meshgrid(*padded[1:], indexing="ij") if d > 0 else []
    for start in range(0, n0, rows):
        x0 = padded[0][start:start + rows]
        coords = [x0.reshape((-1,) + (1,) * len(slab_shape))] + [c[None] for c in rest]
        coords = np.broadcast_arrays(*coords)
        z = np.stack([coords[2 * k] + 1j * coords[2 * k + 1] for k in range(d)], axis=-1)
        vals = np.asarray(f(z.reshape(-1, d)), dtype=float).reshape(z.shape[:-1])
        for ax in range(1, 2 * d):
            vals = _valid_conv(vals, ws[ax], ax)
        buf[start:start + len(x0)] = vals
    return _valid_conv(buf, ws[0], 0)


def _interior(u: np.ndarray, ax: int, off: int) -> tuple:
    sl = [slice(1, -1)] * u.ndim
    sl[ax] = slice(1 + off, u.shape[ax] - 1 + off)
    return tuple(sl)


def _second(u, a, s):
    return (u[_interior(u, a, 1)] - 2 * u[_interior(u, a, 0)] + u[_interior(u, a, -1)]) / (s[a] ** 2)


def _mixed(u, a, b, s):
    def shifted(oa, ob):
        sl = [slice(1, -1)] * u.ndim
        sl[a] = slice(1 + oa, u.shape[a] - 1 + oa)
        sl[b] = slice(1 + ob, u.shape[b] - 1 + ob)
        return u[tuple(sl)]
    return (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4 * s[a] * s[b])


def ma_density_grid(u: np.ndarray, steps, dim: int) -> np.ndarray:
    """d! 4^d det(u_{j kbar}) at interior nodes of a sampled field."""
    if dim == 1:
        return _second(u, 0, steps) + _second(u, 1, steps)
    if dim == 2:
        a = _second(u, 0, steps) + _second(u, 1, steps)  # 4 u_{1 1bar}
        b = _second(u, 2, steps) + _second(u, 3, steps)  # 4 u_{2 2bar}
        c_re = _mixed(u, 0, 2, steps) + _mixed(u, 1, 3, steps)
        det4 = a * b
        del a, b
        det4 -= c_re * c_re
        del c_re
        c_im = _mixed(u, 0, 3, steps) - _mixed(u, 1, 2, steps)
        det4 -= c_im * c_im
        return 2.0 * det4  # 2! * 4^2 det H = 2 * det(4H)
    hs = np.empty(u[(slice(1, -1),) * u.ndim].shape + (dim, dim), dtype=complex)
    for j in range(dim):
        for k in range(dim):
            xj, yj, xk, yk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
            if j == k:
                hs[..., j, j] = _second(u, xj, steps) + _second(u, yj, steps)
            else:
                hs[..., j, k] = (_mixed(u, xj, xk, steps) + _mixed(u, yj, yk, steps)
                                 + 1j * (_mixed(u, xj, yk, steps) - _mixed(u, yj, xk, steps)))
    return math.factorial(dim) * np.linalg.det(hs).real


def ma_mass(f, grid: GridSpec, smoothing: float, truncate: float = TRUNCATE) -> MassReport:
    """Monge-Ampere mass of the Gaussian-mollified field f over the grid.

    The grid should extend at least 5 * smoothing beyond the expected support.
    """
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    if grid.step > smoothing / 2:
        raise GridTooCoarseError(
            f"grid step {grid.step:.6g} exceeds smoothing/2 = {smoothing / 2:.6g}")
    u = mollify_on_grid(f, grid, smoothing, truncate)
    dens = ma_density_grid(u, grid.steps, grid.dim)
    del u
    cells = dens * float(np.prod(grid.steps))
    total = float(np.sum(cells))
    cell_axes = [a[1:-1] for a in grid.real_axes()]
    return MassReport(total, cells, smoothing, grid, cell_axes)


def require_margin(grid: GridSpec, sets, smoothing: float, factor: float = 5.0) -> None:
    """Raise unless every axis covers its set's bounding box plus factor * smoothing."""
    if grid.dim != len(sets):
        raise PreconditionViolatedError("grid dimension does not match number of sets")
    need = factor * smoothing
    for ax, s in zip(grid.axes, sets):
        (rl, rh), (il, ih) = s.bbox()
        slack = 1e-9 * (1 + need)
        if (ax.re[0] > rl - need + slack or ax.re[1] < rh + need - slack
                or ax.im[0] > il - need + slack or ax.im[1] < ih + need - slack):
            raise PreconditionViolatedError(
                f"grid axis {ax} does not cover set bbox {(rl, rh), (il, ih)} with margin {need}")


def grid_for_sets(sets, step: float, smoothing: float | None = None, margin_factor: float = 5.0) -> GridSpec:
    """Smallest grid at the given step that satisfies :func:`require_margin`."""
    smoothing = 4 * step if smoothing is None else smoothing
    return GridSpec.around([s.bbox() for s in sets], margin_factor * smoothing, step)


def support_explore(q: float, sets, grid: GridSpec, smoothing: float) -> MassReport:
    """Monge-Ampere mass map of V_{P_q, E_1 x E_2} near E_1 x E_2.

    Exploratory only: the cell masses are evidence about the support, not a
    statement of what it is.
    """
    from .product import LqField

    if q == 1:
        raise NotSmoothBodyError("q = 1 gives the non-smooth max form; use ma_mass directly")
    if not q > 1:
        raise ValueError("q must exceed 1")
    sets = list(sets)
    require_margin(grid, sets, smoothing)
    return ma_mass(LqField(q, sets), grid, smoothing)
