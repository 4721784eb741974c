"""Frequency-axis quadrature grids and sampled spectra.

A :class:`FrequencyAxis` is a sorted set of nodes with quadrature weights.
Every knot ``r`` with cutoff ``eps`` that participates in a projection
needs the reflection ``xi -> 2 r - xi`` to map nodes of the collar
``[r - eps, r + eps]`` onto nodes.  Two constructions provide this:

* ``FrequencyAxis.composite`` places one symmetric Gauss-Legendre panel on
  each collar and fills the gaps with Gauss-Legendre panels sized from a
  target resolution frequency.  This is the default.
* ``FrequencyAxis.uniform`` uses a uniform trapezoid grid and requires all
  knots to land on grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "MisalignedGridError",
    "FrequencyAxis",
    "SpectrumGrid",
    "Spectrum1D",
    "axis_for_covering",
]

# Largest total phase (radians) over a panel that a q-node Gauss-Legendre
# rule integrates to ~1e-13 (measured on cos/sin, then rounded down).
_PHASE_CAP = {12: 9.0, 16: 18.0, 20: 28.0, 24: 38.0, 32: 60.0, 40: 84.0, 48: 110.0, 64: 160.0}


def phase_cap(q: int) -> float:
    qs = sorted(_PHASE_CAP)
    return float(np.interp(q, qs, [_PHASE_CAP[k] for k in qs]))


class MisalignedGridError(ValueError):
    """A reflection point or support endpoint does not fall on the grid."""


def _gl(q: int):
    x, w = leggauss(q)
    # enforce exact mirror symmetry so that 2r - xi hits a node to the last bit
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


@dataclass
class FrequencyAxis:
    nodes: np.ndarray
    weights: np.ndarray
    nu: np.ndarray  # per-node resolvable angular frequency
    knots: dict = field(default_factory=dict)  # knot -> eps registered for reflection
    kind: str = "composite"

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.nu = np.asarray(self.nu, dtype=float)
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("axis nodes must be strictly increasing")
        self._refl_cache: dict = {}

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    # ------------------------------------------------------------------ build

    @classmethod
    def composite(
        cls,
        knots: Iterable[tuple[float, float]],
        extent: float,
        nu: float | Sequence[tuple[float, float, float]],
        q_collar: int = 32,
        q_gap: int = 32,
        features: Iterable[tuple[float, float]] = (),
    ) -> "FrequencyAxis":
        """Composite Gauss-Legendre axis on ``[-extent, extent]``.

        ``knots`` are (r, eps) pairs; each gets a symmetric panel on
        ``[r - eps, r + eps]``.  ``features`` are extra fixed panels (for
        example the ramps of a test window) placed with ``q_collar`` nodes.
        ``nu`` is either a constant resolution frequency or a list of
        ``(a, b, nu)`` ranges; a gap panel takes the largest ``nu`` of any
        range it meets.
        """
        kn = sorted({float(r): float(e) for r, e in knots}.items())
        fixed = [(r - e, r + e, True) for r, e in kn] + [(float(a), float(b), False) for a, b in features]
        fixed.sort()
        for (a0, b0, _), (a1, b1, _) in zip(fixed, fixed[1:]):
            if a1 < b0:
                raise MisalignedGridError(f"panels [{a0}, {b0}] and [{a1}, {b1}] overlap")
        if fixed and (fixed[0][0] < -extent or fixed[-1][1] > extent):
            raise MisalignedGridError("a collar reaches beyond the axis extent")

        if np.isscalar(nu):
            ranges = [(-math.inf, math.inf, float(nu))]
        else:
            ranges = [(float(a), float(b), float(v)) for a, b, v in nu]

        def nu_at(a, b):
            vals = [v for (r0, r1, v) in ranges if r0 < b and r1 > a]
            return max(vals) if vals else max(v for *_, v in ranges)

        xc, wc = _gl(q_collar)
        cap_c, cap_g = phase_cap(q_collar), phase_cap(q_gap)
        small_q = [q for q in sorted(_PHASE_CAP) if q < q_gap]
        nodes, weights, nus = [], [], []

        def put(a, b, x, w, cap, pieces=1):
            edges = np.linspace(a, b, pieces + 1)
            for p0, p1 in zip(edges[:-1], edges[1:]):
                c, h = 0.5 * (p0 + p1), 0.5 * (p1 - p0)
                nodes.append(c + h * x)
                weights.append(h * w)
                nus.append(np.full(x.size, cap / (p1 - p0)))

        def put_gap(a, b):
            need = nu_at(a, b) * (b - a)
            for q in small_q:
                if phase_cap(q) >= need:
                    x, w = _gl(q)
                    put(a, b, x, w, phase_cap(q))
                    return
            x, w = _gl(q_gap)
            put(a, b, x, w, cap_g, max(1, math.ceil(need / cap_g)))

        cursor = -extent
        for a, b, is_knot in fixed + [(extent, extent, False)]:
            if a > cursor:
                put_gap(cursor, a)
            if b > a:
                if is_knot:
                    # even split keeps the panel set symmetric about the knot
                    v = nu_at(a, b)
                    k = math.ceil(v * (b - a) / cap_c)
                    put(a, b, xc, wc, cap_c, 1 if k <= 1 else 2 * math.ceil(k / 2))
                else:
                    v = nu_at(a, b)
                    put(a, b, xc, wc, cap_c, max(1, math.ceil(v * (b - a) / cap_c)))
            cursor = max(cursor, b)
        ax = cls(np.concatenate(nodes), np.concatenate(weights), np.concatenate(nus), dict(kn), "composite")
        ax.validate_reflections()
        return ax

    @classmethod
    def uniform(cls, extent: float, step: float, knots: Iterable[tuple[float, float]] = ()) -> "FrequencyAxis":
        """Uniform grid ``-extent + m * step`` with trapezoid weights."""
        m = round(2 * extent / step)
        if abs(m * step - 2 * extent) > 1e-9 * extent:
            raise MisalignedGridError("2 * extent must be an integer multiple of step")
        nodes = -extent + step * np.arange(m + 1)
        w = np.full(m + 1, step)
        w[0] = w[-1] = 0.5 * step
        nu = np.full(m + 1, math.pi / step)
        ax = cls(nodes, w, nu, {float(r): float(e) for r, e in knots}, "uniform")
        ax.validate_reflections()
        return ax

    # ------------------------------------------------------------ utilities

    def tol(self) -> float:
        return 1e-9 * max(1.0, abs(self.lo), abs(self.hi)) * (1e-3 if self.kind == "composite" else 1.0)

    def support_slice(self, a: float, b: float) -> slice:
        """Index range of the nodes lying in ``[a, b]``."""
        i0 = int(np.searchsorted(self.nodes, a - self.tol(), side="left"))
        i1 = int(np.searchsorted(self.nodes, b + self.tol(), side="right"))
        return slice(i0, i1)

    def reflection(self, r: float, eps: float) -> tuple[np.ndarray, np.ndarray]:
        """Indices ``i`` of nodes in ``[r - eps, r + eps]`` and ``j`` with
        ``nodes[j] == 2 r - nodes[i]`` up to rounding."""
        key = (r, eps)
        hit = self._refl_cache.get(key)
        if hit is not None:
            return hit
        if self.kind == "uniform":
            step = self.nodes[1] - self.nodes[0]
            m = (r - self.nodes[0]) / step
            if abs(m - round(m)) > 1e-9 * max(1.0, abs(m)):
                raise MisalignedGridError(f"knot {r} is not a grid point of the uniform axis")
        sl = self.support_slice(r - eps, r + eps)
        src = np.arange(sl.start, sl.stop)
        target = 2.0 * r - self.nodes[src]
        j = np.searchsorted(self.nodes, target)
        j = np.clip(j, 0, len(self) - 1)
        jm = np.clip(j - 1, 0, len(self) - 1)
        pick = np.where(np.abs(self.nodes[jm] - target) < np.abs(self.nodes[j] - target), jm, j)
        bad = np.abs(self.nodes[pick] - target) > self.tol()
        if np.any(bad) or (pick.size and (pick.min() < sl.start or pick.max() >= sl.stop)):
            raise MisalignedGridError(f"reflection about knot {r} does not map the collar onto grid nodes")
        out = (src, pick)
        self._refl_cache[key] = out
        return out

    def validate_reflections(self) -> None:
        for r, e in self.knots.items():
            self.reflection(r, e)

    def nu_min(self, a: float, b: float) -> float:
        sl = self.support_slice(a, b)
        if sl.stop <= sl.start:
            return 0.0
        return float(self.nu[sl].min())

    def integrate(self, values, axis: int = -1):
        return np.tensordot(np.asarray(values), self.weights, axes=([axis], [0]))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "size": len(self), "lo": self.lo, "hi": self.hi}


@dataclass
class Spectrum1D:
    axis: FrequencyAxis
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (len(self.axis),):
            raise ValueError("values do not match the axis")

    def inner(self, other: "Spectrum1D") -> complex:
        return complex(np.sum(self.axis.weights * self.values * np.conj(other.values)))

    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.axis.weights * np.abs(self.values) ** 2)))


@dataclass
class SpectrumGrid:
    """Samples of a 2-D spectrum on the tensor product of two axes."""

    axis0: FrequencyAxis
    axis1: FrequencyAxis
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (len(self.axis0), len(self.axis1)):
            raise ValueError(f"values of shape {self.values.shape} do not match axes {(len(self.axis0), len(self.axis1))}")

    @classmethod
    def zeros(cls, axis0: FrequencyAxis, axis1: FrequencyAxis | None = None) -> "SpectrumGrid":
        axis1 = axis0 if axis1 is None else axis1
        return cls(axis0, axis1, np.zeros((len(axis0), len(axis1)), dtype=complex))

    @classmethod
    def from_function(cls, fn, axis0: FrequencyAxis, axis1: FrequencyAxis | None = None) -> "SpectrumGrid":
        axis1 = axis0 if axis1 is None else axis1
        X, Y = np.meshgrid(axis0.nodes, axis1.nodes, indexing="ij")
        return cls(axis0, axis1, fn(X, Y))

    def like(self, values) -> "SpectrumGrid":
        return SpectrumGrid(self.axis0, self.axis1, values)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.axis0.weights, self.axis1.weights)

    def inner(self, other: "SpectrumGrid") -> complex:
        return complex(np.einsum("i,ij,j->", self.axis0.weights, self.values * np.conj(other.values), self.axis1.weights))

    def norm(self) -> float:
        return math.sqrt(max(0.0, self.inner(self).real))


def axis_for_covering(
    cov,
    spatial_extent: float = 16.0,
    n_res: int = 8,
    q_collar: int = 32,
    q_gap: int = 32,
    margin: float = 1.05,
    features: Iterable[tuple[float, float]] = (),
) -> FrequencyAxis:
    """Composite axis adapted to every knot of ``cov``.

    The resolution frequency near a point is
    ``2 pi (n_res + 1) / |I| + 2 * spatial_extent`` for the shortest factor
    interval ``I`` whose support contains it, so brushlets up to roughly
    ``n_res`` (plus those centred inside ``spatial_extent``) and spectra of
    functions living in ``|x| <= spatial_extent`` are integrated exactly.
    """
    ivs = cov.axis_intervals()
    ranges = []
    for iv in ivs:
        a, b = iv.support
        ranges.append((a, b, 2 * math.pi * (n_res + 1) / iv.length + 2 * spatial_extent))
    outer = cov.outer_square
    ext = margin * (outer.hi + outer.eps_hi)
    ranges.append((-ext, ext, 2 * spatial_extent + 2 * math.pi * (n_res + 1) / outer.length))
    return FrequencyAxis.composite(cov.axis_knots(), ext, ranges, q_collar, q_gap, features)
