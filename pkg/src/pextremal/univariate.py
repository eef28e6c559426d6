"""Green functions with pole at infinity for model compact sets in C.

Each set carries a closed-form extremal function V_E, its Wirtinger
derivative off the set, and enough geometry (distance, bounding box,
classification) for the grid-based measure estimates.

Laplacian normalisation used throughout: Delta log|z| = 2 pi delta_0, so the
equilibrium measure of every set has total mass 2 pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotDifferentiableError

NORMALIZATION_NOTE = "Delta log|z| = 2*pi*delta_0; MA mass density = d! * 4^d * det(d^2u/dz_j dzbar_k)"

_ON_SET_TOL = 1e-14


def _log_plus(r):
    return np.log(np.maximum(r, 1.0))


class PlanarSet:
    """Base class for the model compacta."""

    kind: str

    def green(self, zeta):
        raise NotImplementedError

    def green_gradient(self, zeta):
        raise NotImplementedError

    def distance(self, zeta):
        raise NotImplementedError

    def bbox(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """((re_min, re_max), (im_min, im_max)) of the set."""
        raise NotImplementedError

    def classify(self, zeta, collar: float):
        """Label points 'in', 'out' or 'collar' for finite-difference scans.

        'in' points have V_E = 0 and sit at least `collar` away from where
        V_E^2 fails to be smooth; 'out' points are at least `collar` away
        from the set.
        """
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n random points of the set."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Interval(PlanarSet):
    a: float = -1.0
    b: float = 1.0
    kind = "interval"

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise ValueError(f"interval needs finite a < b, got [{self.a}, {self.b}]")

    def _t(self, zeta):
        return (2 * np.asarray(zeta, dtype=complex) - (self.a + self.b)) / (self.b - self.a)

    @staticmethod
    def _branch_root(t):
        """sqrt(t^2 - 1) on the exterior inverse-Joukowski branch: |t + s| >= 1."""
        s = np.sqrt(t * t - 1)
        return np.where(np.abs(t + s) >= np.abs(t - s), s, -s)

    def green(self, zeta):
        t = self._t(zeta)
        s = np.sqrt(t * t - 1)
        # max of the two moduli is the branch with |t + s| >= 1; symmetric in +-s
        r = np.maximum(np.abs(t + s), np.abs(t - s))
        out = np.log(r)
        return np.maximum(out, 0.0)

    def green_gradient(self, zeta):
        z = np.asarray(zeta, dtype=complex)
        on = self.contains(z)
        if np.any(on):
            raise NotDifferentiableError(f"V is not differentiable on [{self.a}, {self.b}]")
        s = self._branch_root(self._t(z))
        return 1.0 / ((self.b - self.a) * s)

    def contains(self, zeta, tol: float = _ON_SET_TOL):
        z = np.asarray(zeta, dtype=complex)
        scale = max(abs(self.a), abs(self.b), 1.0)
        return (np.abs(z.imag) <= tol * scale) & (z.real >= self.a) & (z.real <= self.b)

    def distance(self, zeta):
        z = np.asarray(zeta, dtype=complex)
        x = np.clip(z.real, self.a, self.b)
        return np.abs(z - x)

    def bbox(self):
        return (self.a, self.b), (0.0, 0.0)

    def classify(self, zeta, collar):
        z = np.asarray(zeta, dtype=complex)
        on = self.contains(z)
        end_gap = np.minimum(np.abs(z - self.a), np.abs(z - self.b))
        dist = self.distance(z)
        return np.where(on & (end_gap >= collar), "in",
                        np.where(~on & (dist >= collar), "out", "collar"))

    def sample(self, rng, n):
        return rng.uniform(self.a, self.b, n).astype(complex)

    def to_dict(self):
        return {"kind": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Disk(PlanarSet):
    center: complex = 0j
    radius: float = 1.0
    kind = "disk"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def green(self, zeta):
        z = np.asarray(zeta, dtype=complex)
        return _log_plus(np.abs(z - self.center) / self.radius)

    def green_gradient(self, zeta):
        z = np.asarray(zeta, dtype=complex)
        w = z - self.center
        r = np.abs(w)
        if np.any(np.abs(r - self.radius) <= _ON_SET_TOL * self.radius):
            raise NotDifferentiableError("V is not differentiable on the boundary circle")
        safe = np.where(r > self.radius, w, 1.0)
        return np.where(r > self.radius, 0.5 / safe, 0.0 + 0.0j)

    def contains(self, zeta, tol: float = _ON_SET_TOL):
        z = np.asarray(zeta, dtype=complex)
        return np.abs(z - self.center) <= self.radius * (1 + tol)

    def distance(self, zeta):
        z = np.asarray(zeta, dtype=complex)
        return np.maximum(np.abs(z - self.center) - self.radius, 0.0)

    def bbox(self):
        c, r = complex(self.center), self.radius
        return (c.real - r, c.real + r), (c.imag - r, c.imag + r)

    def classify(self, zeta, collar):
        r = np.abs(np.asarray(zeta, dtype=complex) - self.center)
        return np.where(r <= self.radius - collar, "in",
                        np.where(r >= self.radius + collar, "out", "collar"))

    def sample(self, rng, n):
        rad = self.radius * np.sqrt(rng.uniform(0, 1, n))
        return self.center + rad * np.exp(2j * np.pi * rng.uniform(0, 1, n))

    def to_dict(self):
        c = complex(self.center)
        return {"kind": "disk", "center": [c.real, c.imag], "r": self.radius}


@dataclass(frozen=True)
class UnitCircle(PlanarSet):
    kind = "circle"

    def green(self, zeta):
        return _log_plus(np.abs(np.asarray(zeta, dtype=complex)))

    def green_gradient(self, zeta):
        z = np.asarray(zeta, dtype=complex)
        r = np.abs(z)
        if np.any(np.abs(r - 1.0) <= _ON_SET_TOL):
            raise NotDifferentiableError("V is not differentiable on the unit circle")
        safe = np.where(r > 1, z, 1.0)
        return np.where(r > 1, 0.5 / safe, 0.0 + 0.0j)

    def contains(self, zeta, tol: float = _ON_SET_TOL):
        return np.abs(np.abs(np.asarray(zeta, dtype=complex)) - 1.0) <= tol

    def distance(self, zeta):
        return np.abs(np.abs(np.asarray(zeta, dtype=complex)) - 1.0)

    def bbox(self):
        return (-1.0, 1.0), (-1.0, 1.0)

    def classify(self, zeta, collar):
        # The open unit disk has V = 0 identically, so it groups with the set.
        r = np.abs(np.asarray(zeta, dtype=complex))
        return np.where(r <= 1 - collar, "in", np.where(r >= 1 + collar, "out", "collar"))

    def sample(self, rng, n):
        return np.exp(2j * np.pi * rng.uniform(0, 1, n))

    def to_dict(self):
        return {"kind": "circle"}


def planar_set_from_dict(desc: dict) -> PlanarSet:
    kind = desc.get("kind")
    if kind == "interval":
        return Interval(float(desc.get("a", -1.0)), float(desc.get("b", 1.0)))
    if kind == "disk":
        c = desc.get("center", [0.0, 0.0])
        return Disk(complex(float(c[0]), float(c[1])), float(desc.get("r", 1.0)))
    if kind == "circle":
        return UnitCircle()
    raise ValueError(f"unknown planar set kind {kind!r}")


def green_value(pset: PlanarSet, zeta):
    """V_E(zeta) >= 0, vanishing on E."""
    out = pset.green(zeta)
    return float(out) if np.ndim(out) == 0 else out


def green_gradient(pset: PlanarSet, zeta):
    """Wirtinger derivative dV_E/dzeta off the set (zero inside filled sets)."""
    out = pset.green_gradient(zeta)
    return complex(out) if np.ndim(out) == 0 else out


def arcsine_density(t):
    """Equilibrium density of [-1, 1] as a probability density."""
    t = np.asarray(t, dtype=float)
    return 1.0 / (np.pi * np.sqrt(1.0 - t * t))


def equilibrium_mass(pset: PlanarSet, grid, smoothing: float):
    """Total mass of Delta V_E over the grid, estimated after Gaussian mollification.

    Converges to 2 pi.  Returns the full :class:`~pextremal.mass.MassReport`.
    """
    from .mass import ma_mass, require_margin

    require_margin(grid, [pset], smoothing)
    return ma_mass(lambda z: pset.green(z[..., 0]), grid, smoothing)
