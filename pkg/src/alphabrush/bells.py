"""Ramp, bell and central-bell functions.

The ramp is the iterated-sine construction

    theta_0(t) = clip(t, -1, 1),  theta_{m+1}(t) = sin(pi/2 * theta_m(t)),
    rho(t) = sin(pi/4 * (1 + theta_k(t))),

which satisfies ``rho(t)**2 + rho(-t)**2 == 1`` because ``theta_k`` is odd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .covering import Interval

__all__ = [
    "Ramp",
    "Bell",
    "ramp_eval",
    "bell_eval",
    "central_bell_hat",
    "central_bell_time",
    "DecayCertificate",
    "decay_certificate",
    "ResolutionError",
]


class ResolutionError(ValueError):
    """A sampling request does not resolve the ramp transitions."""


@dataclass(frozen=True)
class Ramp:
    order: int = 3

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("ramp order must be >= 0")

    def theta(self, t):
        t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
        for _ in range(self.order):
            t = np.sin(0.5 * np.pi * t)
        return t

    def __call__(self, t):
        return np.sin(0.25 * np.pi * (1.0 + self.theta(t)))


DEFAULT_RAMP = Ramp(3)


def ramp_eval(ramp: Ramp, xi):
    out = ramp(xi)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Bell:
    interval: Interval
    ramp: Ramp = DEFAULT_RAMP

    def __call__(self, xi):
        iv = self.interval
        xi = np.asarray(xi, dtype=float)
        return self.ramp((xi - iv.lo) / iv.eps_lo) * self.ramp((iv.hi - xi) / iv.eps_hi)

    def hat_central(self, u):
        iv = self.interval
        u = np.asarray(u, dtype=float)
        L = iv.length
        return self.ramp((L / iv.eps_lo) * u) * self.ramp((L / iv.eps_hi) * (1.0 - u))


def bell_eval(bell: Bell, xi):
    out = bell(xi)
    return float(out) if np.ndim(out) == 0 else out


def central_bell_hat(bell: Bell, u):
    """ĝ_I(u), the bell rescaled to the unit interval; b_I(xi) = ĝ_I((xi - lo) / |I|)."""
    out = bell.hat_central(u)
    return float(out) if np.ndim(out) == 0 else out


def _central_panels(bell: Bell, nodes_per_ramp: int, x_max: float):
    # Composite Gauss-Legendre rule on the support of ĝ in the u variable,
    # with one dedicated panel per ramp and enough plateau panels to follow
    # e^{i x u} for |x| <= x_max.
    iv = bell.interval
    L = iv.length
    a, b = iv.eps_lo / L, iv.eps_hi / L
    xg, wg = leggauss(nodes_per_ramp)
    u_parts, w_parts = [], []

    def panel(lo, hi, count):
        edges = np.linspace(lo, hi, count + 1)
        for p0, p1 in zip(edges[:-1], edges[1:]):
            u_parts.append(0.5 * (p0 + p1) + 0.5 * (p1 - p0) * xg)
            w_parts.append(0.5 * (p1 - p0) * wg)

    phase_cap = 0.5 * nodes_per_ramp  # radians per panel, conservative for GL
    for lo, hi in ((-a, a), (1.0 - b, 1.0 + b)):
        panel(lo, hi, max(1, math.ceil(x_max * (hi - lo) / phase_cap)))
    if 1.0 - b > a:
        panel(a, 1.0 - b, max(1, math.ceil(x_max * (1.0 - b - a) / phase_cap)))
    return np.concatenate(u_parts), np.concatenate(w_parts)


def central_bell_time(bell: Bell, x, nodes_per_ramp: int = 64, chunk: int = 4096):
    """Samples of g_I(x) = (2 pi)^{-1/2} ∫ ĝ_I(u) e^{i x u} du.

    The integral is evaluated by a composite Gauss-Legendre rule whose ramp
    panels carry ``nodes_per_ramp`` nodes; fewer than 64 raises
    :class:`ResolutionError`.
    """
    if nodes_per_ramp < 64:
        raise ResolutionError(f"need at least 64 nodes per ramp, got {nodes_per_ramp}")
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    x_max = float(np.max(np.abs(flat))) if flat.size else 0.0
    u, w = _central_panels(bell, nodes_per_ramp, x_max)
    gw = bell.hat_central(u) * w / math.sqrt(2.0 * math.pi)
    out = np.empty(flat.shape, dtype=complex)
    for s in range(0, flat.size, chunk):
        xs = flat[s : s + chunk]
        out[s : s + chunk] = np.exp(1j * np.outer(xs, u)) @ gw
    return out.reshape(x.shape)


@dataclass(frozen=True)
class DecayCertificate:
    r: float
    C: float
    x_max: float
    n_samples: int


def decay_certificate(bell: Bell, r: float = 4.0, x_max: float = 2000.0, n_samples: int = 4000) -> DecayCertificate:
    """Smallest C with |g_I(x)| <= C (1 + |x|)^(-r) on sampled 0 <= x <= x_max.

    Only x >= 0 is sampled: ĝ_I is real, so |g_I(-x)| = |g_I(x)|.
    """
    xs = np.concatenate([[0.0], np.geomspace(1e-2, x_max, n_samples - 1)])
    g = np.abs(central_bell_time(bell, xs))
    C = float(np.max(g * (1.0 + xs) ** r))
    return DecayCertificate(r=r, C=C, x_max=x_max, n_samples=n_samples)
