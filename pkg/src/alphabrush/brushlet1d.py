"""Univariate brushlets and the local projection onto their span.

For an interval I = [a, a') with cutoffs eps, eps'

    ŵ_{n,I}(xi) = sqrt(2/|I|) b_I(xi) cos(pi (n + 1/2) (xi - a) / |I|),

and the orthogonal projection onto their closed span acts on spectra as

    (P_I f)(xi) = b_I(xi) [b_I(xi) f(xi) + b_I(2a - xi) f(2a - xi)
                           - b_I(2a' - xi) f(2a' - xi)].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bells import DEFAULT_RAMP, Bell, Ramp, central_bell_time
from .covering import Interval
from .grid import FrequencyAxis, Spectrum1D

__all__ = [
    "BrushletIndex1D",
    "brushlet_hat",
    "brushlet_hat_matrix",
    "brushlet_time",
    "IntervalOperator",
    "project_spectrum",
    "analyze_interval",
    "TailWarning",
]


class TailWarning(UserWarning):
    """Parseval deficit above tolerance at the coefficient cap."""


@dataclass(frozen=True)
class BrushletIndex1D:
    interval: Interval
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("cosine index must be >= 0")

    @property
    def e(self) -> float:
        return math.pi * (self.n + 0.5) / self.interval.length


def brushlet_hat_matrix(iv: Interval, xi, n_count: int, ramp: Ramp = DEFAULT_RAMP) -> np.ndarray:
    """Columns ŵ_{n,I}(xi) for n = 0 .. n_count - 1; shape (len(xi), n_count)."""
    xi = np.asarray(xi, dtype=float)
    L = iv.length
    b = Bell(iv, ramp)(xi) * math.sqrt(2.0 / L)
    n = np.arange(n_count) + 0.5
    return b[:, None] * np.cos((math.pi / L) * np.outer(xi - iv.lo, n))


def brushlet_hat(idx: BrushletIndex1D, xi, ramp: Ramp = DEFAULT_RAMP):
    iv = idx.interval
    xi = np.asarray(xi, dtype=float)
    L = iv.length
    out = math.sqrt(2.0 / L) * Bell(iv, ramp)(xi) * np.cos(math.pi * (idx.n + 0.5) * (xi - iv.lo) / L)
    return float(out) if out.ndim == 0 else out


def brushlet_time(idx: BrushletIndex1D, x, ramp: Ramp = DEFAULT_RAMP, nodes_per_ramp: int = 64):
    """w_{n,I}(x) = sqrt(|I|/2) e^{i a x} [g_I(|I|(x + e)) + g_I(|I|(x - e))]."""
    iv = idx.interval
    x = np.asarray(x, dtype=float)
    L, e = iv.length, idx.e
    bell = Bell(iv, ramp)
    g = central_bell_time(bell, np.concatenate([(L * (x + e)).ravel(), (L * (x - e)).ravel()]), nodes_per_ramp)
    g = g.reshape((2,) + x.shape)
    return math.sqrt(L / 2.0) * np.exp(1j * iv.lo * x) * (g[0] + g[1])


class IntervalOperator:
    """Projection and coefficient maps of one interval on a fixed axis."""

    def __init__(self, iv: Interval, axis: FrequencyAxis, ramp: Ramp = DEFAULT_RAMP):
        self.interval = iv
        self.axis = axis
        self.ramp = ramp
        a, b = iv.support
        if a < axis.lo or b > axis.hi:
            from .grid import MisalignedGridError

            raise MisalignedGridError(f"axis [{axis.lo}, {axis.hi}] does not cover the support [{a}, {b}]")
        self.sl = axis.support_slice(a, b)
        s0 = self.sl.start
        self.xi = axis.nodes[self.sl]
        self.w = axis.weights[self.sl]
        self.b = Bell(iv, ramp)(self.xi)
        src, dst = axis.reflection(iv.lo, iv.eps_lo)
        self.lo_src, self.lo_dst = src - s0, dst - s0
        src, dst = axis.reflection(iv.hi, iv.eps_hi)
        self.hi_src, self.hi_dst = src - s0, dst - s0
        self._W = np.zeros((self.xi.size, 0))
        self.n_cap = max(0, int(math.floor(axis.nu_min(a, b) * iv.length / (2 * math.pi) - 0.5)))

    def __len__(self) -> int:
        return self.xi.size

    def basis(self, n_count: int) -> np.ndarray:
        if self._W.shape[1] < n_count:
            self._W = brushlet_hat_matrix(self.interval, self.xi, n_count, self.ramp)
        return self._W[:, :n_count]

    def apply_local(self, F: np.ndarray, axis: int = 0) -> np.ndarray:
        """P_I on an array already restricted to the support along ``axis``."""
        F = np.moveaxis(F, axis, 0)
        shape = (-1,) + (1,) * (F.ndim - 1)
        b = self.b.reshape(shape)
        G = b * F
        out = b * G
        out[self.lo_src] += b[self.lo_src] * G[self.lo_dst]
        out[self.hi_src] -= b[self.hi_src] * G[self.hi_dst]
        return np.moveaxis(out, 0, axis)

    def apply(self, F: np.ndarray, axis: int = 0) -> np.ndarray:
        """P_I on full-axis samples along ``axis``; zero outside the support."""
        F = np.asarray(F)
        out = np.zeros(F.shape, dtype=np.result_type(F, float))
        idx = [slice(None)] * F.ndim
        idx[axis] = self.sl
        out[tuple(idx)] = self.apply_local(F[tuple(idx)], axis)
        return out

    def coefficients(self, f_local: np.ndarray, n_count: int) -> np.ndarray:
        return self.basis(n_count).T @ (self.w * f_local)


def project_spectrum(iv: Interval, f: Spectrum1D, ramp: Ramp = DEFAULT_RAMP) -> Spectrum1D:
    op = IntervalOperator(iv, f.axis, ramp)
    return Spectrum1D(f.axis, op.apply(f.values))


def analyze_interval(iv: Interval, f: Spectrum1D, n_max: int, tail_tol: float = 1e-8,
                     ramp: Ramp = DEFAULT_RAMP, warn: bool = True):
    """Coefficients c_n = <f, w_{n,I}>, n = 0 .. n_max, and the Parseval deficit.

    The deficit is ``<P_I f, f> - sum |c_n|^2`` relative to ``||f||^2``.
    """
    op = IntervalOperator(iv, f.axis, ramp)
    loc = f.values[op.sl]
    c = op.coefficients(loc, n_max + 1)
    pf = op.apply_local(loc)
    energy = float(np.real(np.sum(op.w * pf * np.conj(loc))))
    total = max(f.norm() ** 2, np.finfo(float).tiny)
    deficit = (energy - float(np.sum(np.abs(c) ** 2))) / total
    if warn and abs(deficit) > tail_tol:
        warnings.warn(f"Parseval deficit {deficit:.3e} exceeds {tail_tol:.1e} at n_max = {n_max}", TailWarning)
    return c, deficit
