"""Discrete Hardy-Littlewood and Peetre maximal functions, and the pointwise
bound of brushlet sums by maximal functions of lattice-box indicators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .bells import DEFAULT_RAMP, Bell, Ramp, central_bell_time
from .covering import Rect
from .spaces import ubox

__all__ = [
    "SampledField",
    "symmetric_field",
    "radius_ladder",
    "hl_maximal",
    "peetre_maximal",
    "brushlet_abs_1d",
    "check_maxbound",
    "west_constant",
    "LADDER_CONSTANT",
]


@dataclass
class SampledField:
    """Values on the square grid ``x0 + step * k``, k = 0 .. n-1, per axis."""

    x0: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("SampledField needs a square 2-D array")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def coords(self) -> np.ndarray:
        return self.x0 + self.step * np.arange(self.n)

    def like(self, values) -> "SampledField":
        return SampledField(self.x0, self.step, values)


def symmetric_field(values, step: float) -> SampledField:
    """Grid symmetric about the origin, so x -> -x maps samples to samples."""
    n = np.asarray(values).shape[0]
    return SampledField(-0.5 * (n - 1) * step, step, values)


def radius_ladder(field: SampledField) -> np.ndarray:
    """0 (the sample itself) followed by step * 2^k up to the grid diameter."""
    diam = math.sqrt(2.0) * field.step * (field.n - 1)
    k = int(math.ceil(math.log2(max(diam / field.step, 1.0))))
    return np.concatenate([[0.0], field.step * 2.0 ** np.arange(k + 1)])


# sup over the ladder of radii t_k = 2^k h is within this factor of the sup
# over all t in [h, diam] for M_r with r = 1 (a ball of radius t lies in the
# ladder ball of radius <= 2t, whose area is 4 times larger); for general r
# the factor is LADDER_CONSTANT ** (1 / r).
LADDER_CONSTANT = 4.0


def _disc(radius_px: float) -> np.ndarray:
    R = int(math.floor(radius_px))
    k = np.arange(-R, R + 1)
    return (k[:, None] ** 2 + k[None, :] ** 2 <= radius_px * radius_px + 1e-9).astype(float)


def hl_maximal(u: SampledField, r: float = 1.0) -> SampledField:
    """sup_t (average of |u|^r over the discrete disc of radius t)^(1/r).

    Discs contain the grid points within distance t; the average divides by
    the number of such points, and samples outside the grid count as 0.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    a = np.abs(u.values) ** r
    best = a.copy()
    for t in radius_ladder(u)[1:]:
        D = _disc(t / u.step)
        avg = fftconvolve(a, D, mode="same") / D.sum()
        np.maximum(best, avg, out=best)
    np.maximum(best, 0.0, out=best)
    return u.like(best ** (1.0 / r))


def peetre_maximal(u: SampledField, a: float, R: float, chunk: int = 2048) -> SampledField:
    """u*(a, R; x) = max over grid points x' of <R (x - x')>^(-a) |u(x')|."""
    if R <= 0:
        raise ValueError("R must be positive")
    x = u.coords
    X, Y = np.meshgrid(x, x, indexing="ij")
    mag = np.abs(u.values)
    src = np.nonzero(mag)
    sx, sy, sv = X[src], Y[src], mag[src]
    px, py = X.ravel(), Y.ravel()
    out = np.zeros(px.size)
    for s in range(0, sv.size, chunk):
        dx = px[:, None] - sx[None, s : s + chunk]
        dy = py[:, None] - sy[None, s : s + chunk]
        w = (1.0 + R * R * (dx * dx + dy * dy)) ** (-0.5 * a)
        np.maximum(out, np.max(w * sv[None, s : s + chunk], axis=1), out=out)
    return u.like(out.reshape(mag.shape))


def brushlet_abs_1d(iv, x, n_count: int, ramp: Ramp = DEFAULT_RAMP) -> np.ndarray:
    """|w_{n,I}(x)| for n = 0 .. n_count - 1; shape (len(x), n_count)."""
    x = np.asarray(x, dtype=float)
    L = iv.length
    e = math.pi * (np.arange(n_count) + 0.5) / L
    bell = Bell(iv, ramp)
    args = np.concatenate([L * (x[:, None] + e[None, :]), L * (x[:, None] - e[None, :])], axis=1)
    g = central_bell_time(bell, args.ravel()).reshape(args.shape)
    return math.sqrt(L / 2.0) * np.abs(g[:, :n_count] + g[:, n_count:])


def _reflections(F: np.ndarray) -> list[np.ndarray]:
    # R1 = Id, R2 = -Id, R3 (x1, x2) = (x1, -x2), R4 = -R3, on a symmetric grid
    return [F, F[::-1, ::-1], F[:, ::-1], F[::-1, :]]


def _maxbound_grid(Q: Rect, n_max: int, step: float | None, extent: float | None):
    dx, dy = Q.delta
    step = step or 1.0 / (4.0 * max(dx, dy))
    extent = extent or math.pi * (n_max + 2) / min(dx, dy)
    n = 2 * int(math.ceil(extent / step)) + 1
    return step, n


def check_maxbound(Q: Rect, coeffs: np.ndarray, r: float = 0.5, step: float | None = None,
                   extent: float | None = None, ramp: Ramp = DEFAULT_RAMP) -> dict:
    """max over grid samples of LHS / RHS, where

    LHS(x) = sum_n |s_n| |w_{n,Q}(x)|,
    RHS(x) = |Q|^(1/2) sum_l M_r(sum_n |s_n| 1_{U(Q,n)})(R_l x).
    """
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    S = np.abs(np.asarray(coeffs))
    if not np.any(S):
        return {"ratio": 0.0, "lhs_max": 0.0, "rhs_min": 0.0, "n": 0}
    n1, n2 = S.shape
    step, n = _maxbound_grid(Q, max(n1, n2), step, extent)
    fld = symmetric_field(np.zeros((n, n)), step)
    x = fld.coords
    A1 = brushlet_abs_1d(Q.ix, x, n1, ramp)
    A2 = brushlet_abs_1d(Q.iy, x, n2, ramp)
    lhs = A1 @ S @ A2.T
    X, Y = np.meshgrid(x, x, indexing="ij")
    V = np.zeros((n, n))
    for a in range(n1):
        for b in range(n2):
            if S[a, b]:
                V += S[a, b] * ubox(Q, (a, b)).contains(X, Y)
    M = hl_maximal(fld.like(V), r).values
    rhs = math.sqrt(Q.area) * sum(_reflections(M))
    ok = rhs > 0
    ratio = float(np.max(lhs[ok] / rhs[ok]))
    return {"ratio": ratio, "lhs_max": float(lhs.max()), "rhs_min": float(rhs[ok].min()), "n": int(n),
            "step": step}


def west_constant(Q: Rect, n: tuple[int, int], N: float = 4.0, step: float | None = None,
                  extent: float | None = None, ramp: Ramp = DEFAULT_RAMP) -> float:
    """max over grid samples of |w_{n,Q}(x)| / (|Q|^(1/2) sum_l (1 + |R_l delta_Q x - pi (n + a)|)^(-N))."""
    step, m = _maxbound_grid(Q, max(n) + 1, step, extent)
    x = step * (np.arange(m) - (m - 1) / 2)
    a1 = brushlet_abs_1d(Q.ix, x, n[0] + 1, ramp)[:, n[0]]
    a2 = brushlet_abs_1d(Q.iy, x, n[1] + 1, ramp)[:, n[1]]
    w = np.outer(a1, a2)
    dx, dy = Q.delta
    X, Y = np.meshgrid(x, x, indexing="ij")
    c1, c2 = math.pi * (n[0] + 0.5), math.pi * (n[1] + 0.5)
    env = np.zeros_like(w)
    for s1, s2 in ((1, 1), (-1, -1), (1, -1), (-1, 1)):
        env += (1.0 + np.hypot(s1 * dx * X - c1, s2 * dy * Y - c2)) ** (-N)
    return float(np.max(w / (math.sqrt(Q.area) * env)))
