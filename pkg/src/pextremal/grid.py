"""Rectangular sampling grids in C^d."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AxisSpec:
    """One complex coordinate: a rectangle [re] x [im] sampled n_re x n_im."""

    re: tuple[float, float]
    im: tuple[float, float]
    n_re: int
    n_im: int

    def __post_init__(self):
        for lo, hi in (self.re, self.im):
            if not lo <= hi:
                raise ValueError(f"axis range must be ordered, got ({lo}, {hi})")
        if self.n_re < 2 or self.n_im < 2:
            raise ValueError("axis counts must be >= 2")

    @classmethod
    def from_step(cls, re, im, step: float) -> "AxisSpec":
        """Counts chosen so the step is at most `step`, ranges widened symmetrically."""
        def fit(lo, hi):
            n = max(2, math.ceil((hi - lo) / step - 1e-9) + 1)
            span = (n - 1) * step
            mid = 0.5 * (lo + hi)
            return (mid - span / 2, mid + span / 2), n
        (re2, n_re), (im2, n_im) = fit(*re), fit(*im)
        return cls(re2, im2, n_re, n_im)

    @property
    def steps(self) -> tuple[float, float]:
        return ((self.re[1] - self.re[0]) / (self.n_re - 1),
                (self.im[1] - self.im[0]) / (self.n_im - 1))

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(self.re[0], self.re[1], self.n_re),
                np.linspace(self.im[0], self.im[1], self.n_im))


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid over the 2d real coordinates (re_1, im_1, ..., re_d, im_d).

    Points are enumerated row-major in that axis order.
    """

    axes: tuple[AxisSpec, ...]

    @classmethod
    def square(cls, dim: int, lo: float, hi: float, n: int) -> "GridSpec":
        return cls(tuple(AxisSpec((lo, hi), (lo, hi), n, n) for _ in range(dim)))

    @classmethod
    def around(cls, boxes, margin: float, step: float) -> "GridSpec":
        """Grid covering each ((re_lo, re_hi), (im_lo, im_hi)) box plus margin."""
        axes = []
        for (re, im) in boxes:
            axes.append(AxisSpec.from_step((re[0] - margin, re[1] + margin),
                                           (im[0] - margin, im[1] + margin), step))
        return cls(tuple(axes))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(n for a in self.axes for n in (a.n_re, a.n_im))

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(s for a in self.axes for s in a.steps)

    @property
    def step(self) -> float:
        return max(self.steps)

    def real_axes(self) -> list[np.ndarray]:
        return [c for a in self.axes for c in a.coords()]

    def points(self) -> np.ndarray:
        """All grid points as an (N, d) complex array, row-major."""
        mesh = np.meshgrid(*self.real_axes(), indexing="ij")
        z = np.stack([mesh[2 * k] + 1j * mesh[2 * k + 1] for k in range(self.dim)], axis=-1)
        return z.reshape(-1, self.dim)

    def to_dict(self) -> dict:
        return {"axes": [{"re": list(a.re), "im": list(a.im), "n_re": a.n_re, "n_im": a.n_im}
                         for a in self.axes]}

    @classmethod
    def from_dict(cls, desc: dict) -> "GridSpec":
        axes = []
        for ax in desc["axes"]:
            if "step" in ax:
                axes.append(AxisSpec.from_step(tuple(ax["re"]), tuple(ax["im"]), float(ax["step"])))
            else:
                axes.append(AxisSpec(tuple(ax["re"]), tuple(ax["im"]), int(ax["n_re"]), int(ax["n_im"])))
        return cls(tuple(axes))
