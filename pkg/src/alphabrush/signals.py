"""Random band-limited test spectra supported in the covered annulus."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bells import DEFAULT_RAMP, Ramp
from .covering import Covering
from .grid import FrequencyAxis, SpectrumGrid, axis_for_covering

__all__ = [
    "AnnulusWindow",
    "annulus_window",
    "GaussianBumps",
    "random_bumps",
    "plateau_bumps",
    "test_axis",
    "standard_family",
]


def _gap_after(knots: list[tuple[float, float]], r: float) -> tuple[float, float]:
    pos = [(k, e) for k, e in knots if k > 0]
    i = next(i for i, (k, _) in enumerate(pos) if k == r)
    k0, e0 = pos[i]
    k1, e1 = pos[i + 1]
    return k0 + e0, k1 - e1


def _gap_before(knots: list[tuple[float, float]], r: float) -> tuple[float, float]:
    pos = [(k, e) for k, e in knots if k > 0]
    i = next(i for i, (k, _) in enumerate(pos) if k == r)
    k0, e0 = pos[i - 1]
    k1, e1 = pos[i]
    return k0 + e0, k1 - e1


@dataclass(frozen=True)
class AnnulusWindow:
    """W = B_out ⊗ B_out - B_in ⊗ B_in with smooth even 1-D cutoffs.

    ``B_in`` falls from 1 to 0 on ``inner`` and ``B_out`` on ``outer``; both
    transition ranges sit in knot-free gaps, so W vanishes on the collars of
    the inner hole and of the outer square.
    """

    inner: tuple[float, float]
    outer: tuple[float, float]
    ramp: Ramp = DEFAULT_RAMP

    def cutoff(self, xi, rng: tuple[float, float]):
        a, b = rng
        c, w = 0.5 * (a + b), 0.5 * (b - a)
        return self.ramp((c - np.abs(xi)) / w)

    def __call__(self, xi1, xi2):
        bo = self.cutoff(xi1, self.outer) * self.cutoff(xi2, self.outer)
        bi = self.cutoff(xi1, self.inner) * self.cutoff(xi2, self.inner)
        return bo - bi

    @property
    def features(self) -> list[tuple[float, float]]:
        (a, b), (c, d) = self.inner, self.outer
        return [(a, b), (-b, -a), (c, d), (-d, -c)]


def annulus_window(cov: Covering, inner_pos=(0.25, 0.75), outer_pos=(0.3, 0.8), ramp: Ramp = DEFAULT_RAMP) -> AnnulusWindow:
    kn = cov.axis_knots()
    hole = cov.inner_square.hi
    g0, g1 = _gap_after(kn, hole)
    inner = (g0 + inner_pos[0] * (g1 - g0), g0 + inner_pos[1] * (g1 - g0))
    top = cov.outer_square.hi
    h0, h1 = _gap_before(kn, top)
    outer = (h0 + outer_pos[0] * (h1 - h0), h0 + outer_pos[1] * (h1 - h0))
    return AnnulusWindow(inner, outer, ramp)


def test_axis(cov: Covering, window: AnnulusWindow | None = None, **kw) -> FrequencyAxis:
    """Covering-adapted axis that also resolves the window transitions."""
    feats = window.features if window is not None else ()
    return axis_for_covering(cov, features=feats, **kw)


@dataclass
class GaussianBumps:
    amp: np.ndarray  # complex (K,)
    centers: np.ndarray  # (K, 2) frequency centres
    sigma: np.ndarray  # (K,)
    shifts: np.ndarray  # (K, 2) spatial positions
    window: AnnulusWindow | None = None

    def __call__(self, xi1, xi2):
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        out = np.zeros(np.broadcast(xi1, xi2).shape, dtype=complex)
        for a, (m1, m2), s, (x1, x2) in zip(self.amp, self.centers, self.sigma, self.shifts):
            # separable evaluation keeps the cost at O(M) exponentials per bump
            g1 = np.exp(-((xi1 - m1) ** 2) / (2 * s * s) - 1j * xi1 * x1)
            g2 = np.exp(-((xi2 - m2) ** 2) / (2 * s * s) - 1j * xi2 * x2)
            out += a * g1 * g2
        if self.window is not None:
            out *= self.window(xi1, xi2)
        return out

    def on(self, axis0: FrequencyAxis, axis1: FrequencyAxis | None = None) -> SpectrumGrid:
        axis1 = axis0 if axis1 is None else axis1
        u, v = axis0.nodes, axis1.nodes
        vals = np.zeros((u.size, v.size), dtype=complex)
        for a, (m1, m2), s, (x1, x2) in zip(self.amp, self.centers, self.sigma, self.shifts):
            g1 = np.exp(-((u - m1) ** 2) / (2 * s * s) - 1j * u * x1)
            g2 = np.exp(-((v - m2) ** 2) / (2 * s * s) - 1j * v * x2)
            vals += a * np.outer(g1, g2)
        if self.window is not None:
            w = self.window
            vals *= np.outer(w.cutoff(u, w.outer), w.cutoff(v, w.outer)) - np.outer(
                w.cutoff(u, w.inner), w.cutoff(v, w.inner))
        return SpectrumGrid(axis0, axis1, vals)


def random_bumps(cov: Covering, rng: np.random.Generator, k: int = 6, spatial_extent: float = 4.0,
                 window: AnnulusWindow | None = None, levels=None) -> GaussianBumps:
    """``k`` Gaussian bumps centred in randomly chosen annuli of ``cov``.

    Widths scale with the distance of the centre to the origin; spatial
    shifts are uniform in ``[-spatial_extent/2, spatial_extent/2]^2``.
    """
    window = window or annulus_window(cov)
    lv = list(levels) if levels is not None else cov.active_levels
    centers, sig = [], []
    for _ in range(k):
        j = int(rng.choice(lv))
        Q = cov.annuli[j][int(rng.integers(len(cov.annuli[j])))]
        c = np.array([rng.uniform(Q.ix.lo, Q.ix.hi), rng.uniform(Q.iy.lo, Q.iy.hi)])
        centers.append(c)
        sig.append(0.3 * max(np.max(np.abs(c)), 1e-3) * rng.uniform(0.5, 1.5))
    amp = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    shifts = rng.uniform(-spatial_extent / 2, spatial_extent / 2, size=(k, 2))
    return GaussianBumps(amp, np.array(centers), np.array(sig), shifts, window)


def plateau_bumps(cov: Covering, axis: FrequencyAxis, rng: np.random.Generator, rects=None,
                  spatial_extent: float = 2.0, ramp: Ramp = DEFAULT_RAMP) -> SpectrumGrid:
    """Random sum of narrow Gaussians, one per rect, centred in the plateau of
    its rect.  The width is 1/14 of the plateau, so on every collar the
    spectrum is below 1e-10 of its peak."""
    rects = cov.rects if rects is None else rects
    u = axis.nodes
    vals = np.zeros((u.size, u.size), dtype=complex)

    def bump(iv, x0):
        p0, p1 = iv.lo + iv.eps_lo, iv.hi - iv.eps_hi
        s = (2 * u - (p0 + p1)) / (p1 - p0)
        return np.exp(-24.5 * s * s - 1j * u * x0)

    for Q in rects:
        a = rng.standard_normal() + 1j * rng.standard_normal()
        x = rng.uniform(-spatial_extent / 2, spatial_extent / 2, size=2)
        vals += a * np.outer(bump(Q.ix, x[0]), bump(Q.iy, x[1]))
    return SpectrumGrid(axis, axis, vals)


def standard_family(cov: Covering, axis: FrequencyAxis, window: AnnulusWindow, n: int = 50, seed: int = 0):
    """Mixed family of test spectra used for norm-equivalence experiments.

    Even members are plateau bumps on 6 random rects, odd members are 3
    windowed Gaussian bumps; all spatial shifts lie in [-1, 1]^2.
    """
    rng = np.random.default_rng(seed)
    for i in range(n):
        if i % 2 == 0:
            idx = rng.choice(len(cov.rects), size=6, replace=False)
            yield plateau_bumps(cov, axis, rng, rects=[cov.rects[k] for k in idx], spatial_extent=2.0)
        else:
            yield random_bumps(cov, rng, k=3, spatial_extent=2.0, window=window).on(axis)
