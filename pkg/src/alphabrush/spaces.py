"""Hybrid weight, lattice boxes U(Q, n), sequence norms and BAPU-filtered
Triebel-Lizorkin / modulation norms."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bells import DEFAULT_RAMP, Ramp
from .covering import Covering, Interval, Rect

__all__ = [
    "HybridWeight",
    "NormParams",
    "UBox",
    "NormResult",
    "moderation_check",
    "ubox",
    "ubox_overlap",
    "sequence_norm",
    "single_coefficient_norm",
    "sfunc_norm",
    "BAPU",
    "bapu",
    "tl_norm",
    "mod_norm",
    "equivalence_experiment",
    "TruncationWarning",
]


class TruncationWarning(UserWarning):
    """Spatial quadrature box misses more mass than requested."""


@dataclass(frozen=True)
class HybridWeight:
    """h(xi) = c(|xi|) |xi|^(2 - alpha) + (1 - c(|xi|)) |xi|^alpha with a smooth
    cutoff c equal to 1 on [0, 2/3] and 0 on [4/3, inf)."""

    alpha: float
    ramp: Ramp = DEFAULT_RAMP

    def cutoff(self, t):
        return self.ramp(3.0 * (1.0 - np.asarray(t, dtype=float))) ** 2

    def radial(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("hybrid weight is undefined at the origin")
        c = self.cutoff(t)
        return c * t ** (2.0 - self.alpha) + (1.0 - c) * t**self.alpha

    def __call__(self, xi1, xi2=None):
        if xi2 is None:
            xi = np.asarray(xi1, dtype=float)
            t = np.hypot(xi[..., 0], xi[..., 1])
        else:
            t = np.hypot(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        out = self.radial(t)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class NormParams:
    s: float = 0.0
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError("p must be finite and positive")
        if not self.q > 0:
            raise ValueError("q must be positive (inf allowed)")


@dataclass
class NormResult:
    value: float
    truncation_mass: float = 0.0
    warnings: list = field(default_factory=list)
    method: str = ""

    def to_dict(self) -> dict:
        return {"value": self.value, "truncation_mass": self.truncation_mass,
                "warnings": list(self.warnings), "method": self.method}


def moderation_check(cov: Covering, hw: HybridWeight, samples: int = 7) -> float:
    """max over Q of sup/inf of h over a samples x samples lattice of closed Q."""
    s = np.linspace(0.0, 1.0, samples)
    R = 1.0
    for Q in cov.rects:
        X, Y = np.meshgrid(Q.ix.lo + s * Q.ix.length, Q.iy.lo + s * Q.iy.length, indexing="ij")
        ok = (X != 0) | (Y != 0)
        h = hw(X[ok], Y[ok])
        R = max(R, float(h.max() / h.min()))
    return R


# ---------------------------------------------------------------------------
# lattice boxes


@dataclass(frozen=True)
class UBox:
    rect: Rect
    n: tuple[int, int]

    @property
    def center(self) -> tuple[float, float]:
        dx, dy = self.rect.delta
        return (math.pi * (self.n[0] + 0.5) / dx, math.pi * (self.n[1] + 0.5) / dy)

    @property
    def semi_axes(self) -> tuple[float, float]:
        dx, dy = self.rect.delta
        return (1.0 / dx, 1.0 / dy)

    @property
    def area(self) -> float:
        return math.pi / self.rect.area

    def contains(self, y1, y2):
        dx, dy = self.rect.delta
        u = dx * np.asarray(y1, dtype=float) - math.pi * (self.n[0] + 0.5)
        v = dy * np.asarray(y2, dtype=float) - math.pi * (self.n[1] + 0.5)
        return u * u + v * v < 1.0


def ubox(Q: Rect, n) -> UBox:
    return UBox(Q, (int(n[0]), int(n[1])))


def ubox_overlap(Q: Rect, n_max: int = 8, samples: int = 20000, rng=None) -> int:
    """Largest number of boxes U(Q, n), 0 <= n_i < n_max, containing one of
    ``samples`` random points of their union's bounding box."""
    rng = np.random.default_rng(0) if rng is None else rng
    dx, dy = Q.delta
    y1 = rng.uniform(-1.0 / dx, (math.pi * n_max + 1.0) / dx, samples)
    y2 = rng.uniform(-1.0 / dy, (math.pi * n_max + 1.0) / dy, samples)
    count = np.zeros(samples, dtype=int)
    for a in range(n_max):
        for b in range(n_max):
            count += ubox(Q, (a, b)).contains(y1, y2)
    return int(count.max())


# ---------------------------------------------------------------------------
# sequence norm


def _amplitudes(coeffs, cov: Covering, hw: HybridWeight, npar: NormParams, amplitude: str = "sqrtQ"):
    """Flat arrays (v, cx, cy, ax, ay) for every nonzero coefficient."""
    vs, cxs, cys, axs, ays = [], [], [], [], []
    for rid in coeffs.rect_ids():
        blk = coeffs.blocks[rid]
        n1, n2 = np.nonzero(blk)
        if n1.size == 0:
            continue
        Q = cov.rect(rid)
        dx, dy = Q.delta
        h = hw(*Q.xi)
        scale = h**npar.s * math.sqrt(Q.area) if amplitude == "sqrtQ" else h ** (npar.s + 1.0)
        vs.append(scale * np.abs(blk[n1, n2]))
        cxs.append(math.pi * (n1 + 0.5) / dx)
        cys.append(math.pi * (n2 + 0.5) / dy)
        axs.append(np.full(n1.size, 1.0 / dx))
        ays.append(np.full(n1.size, 1.0 / dy))
    if not vs:
        z = np.zeros(0)
        return z, z, z, z, z
    return tuple(np.concatenate(a) for a in (vs, cxs, cys, axs, ays))


def _line_integral(lo, hi, val, pq: float, qinf: bool) -> float:
    """∫ (sum_k val_k 1[lo_k, hi_k](x))^(pq) dx, or with a max when qinf."""
    if lo.size == 0:
        return 0.0
    if not qinf:
        pts = np.concatenate([lo, hi])
        inc = np.concatenate([val, -val])
        order = np.argsort(pts, kind="stable")
        pts, inc = pts[order], inc[order]
        level = np.cumsum(inc)[:-1]
        np.maximum(level, 0.0, out=level)
        return float(np.sum(np.diff(pts) * level**pq))
    pts = np.unique(np.concatenate([lo, hi]))
    mid = 0.5 * (pts[:-1] + pts[1:])
    act = (lo[None, :] <= mid[:, None]) & (hi[None, :] >= mid[:, None])
    m = np.max(np.where(act, val[None, :], 0.0), axis=1)
    return float(np.sum(np.diff(pts) * m**pq))


def _scanline(v, cx, cy, ax, ay, p: float, q: float, n_theta: int = 24) -> float:
    """∫_{R^2} (sum_k v_k^q 1_{E_k})^{p/q} for axis-aligned ellipses E_k."""
    qinf = math.isinf(q)
    val = v if qinf else v**q
    pq = p if qinf else p / q
    ev = np.unique(np.concatenate([cy - ay, cy + ay]))
    th, tw = leggauss(n_theta)
    th = 0.5 * math.pi * (th + 1.0)
    tw = 0.5 * math.pi * tw
    order = np.argsort(cy - ay)
    lo_y, hi_y = (cy - ay)[order], (cy + ay)[order]
    total = 0.0
    for t0, t1 in zip(ev[:-1], ev[1:]):
        # active ellipses span the whole slab
        k_end = np.searchsorted(lo_y, t0, side="right")
        cand = order[:k_end][hi_y[:k_end] >= t1]
        if cand.size == 0:
            continue
        half = 0.5 * (t1 - t0)
        ys = t0 + half * (1.0 - np.cos(th))
        jac = half * np.sin(th)
        for y, wj in zip(ys, tw * jac):
            u = (y - cy[cand]) / ay[cand]
            chord = ax[cand] * np.sqrt(np.maximum(0.0, 1.0 - u * u))
            total += wj * _line_integral(cx[cand] - chord, cx[cand] + chord, val[cand], pq, qinf)
    return max(total, 0.0)


def sequence_norm(coeffs, cov: Covering, hw: HybridWeight, npar: NormParams, method: str = "auto",
                  amplitude: str = "sqrtQ", n_theta: int = 24) -> NormResult:
    """Norm of {s_{Q,n}} in the sequence space f^{s,alpha}_{p,q}.

    ``method="exact"`` uses sum_k v_k^p |U_k| and needs p == q; ``"scanline"``
    integrates the piecewise-constant integrand exactly along horizontal
    lines and by Gauss-Legendre (cosine-mapped) across them.  ``"auto"``
    picks exact when p == q.
    """
    v, cx, cy, ax, ay = _amplitudes(coeffs, cov, hw, npar, amplitude)
    if v.size == 0:
        return NormResult(0.0, 0.0, [], method)
    if method == "auto":
        method = "exact" if npar.p == npar.q else "scanline"
    if method == "exact":
        if npar.p != npar.q:
            raise ValueError("exact evaluation needs p == q")
        area = math.pi * ax * ay
        return NormResult(float(np.sum(v**npar.p * area)) ** (1.0 / npar.p), 0.0, [], "exact")
    if method == "scanline":
        val = _scanline(v, cx, cy, ax, ay, npar.p, npar.q, n_theta)
        return NormResult(val ** (1.0 / npar.p), 0.0, [], "scanline")
    raise ValueError(f"unknown method {method!r}")


def single_coefficient_norm(c: complex, Q: Rect, hw: HybridWeight, npar: NormParams) -> float:
    """h(xi_Q)^s |Q|^(1/2) |c| |U(Q, n)|^(1/p) with |U| = pi / |Q|."""
    return hw(*Q.xi) ** npar.s * math.sqrt(Q.area) * abs(c) * (math.pi / Q.area) ** (1.0 / npar.p)


def sfunc_norm(f, system, hw: HybridWeight, npar: NormParams, tail_tol: float = 1e-8, **kw) -> NormResult:
    """‖S_q^s f‖_{L_p}: the sequence norm of the analysis coefficients of f."""
    coeffs, rep = system.analyze(f, tail_tol=tail_tol, warn=False)
    res = sequence_norm(coeffs, system.cov, hw, npar, **kw)
    if rep.unmet:
        res.warnings.append(f"{len(rep.unmet)} rects above tail tolerance (max deficit {rep.max_deficit:.2e})")
    return res


# ---------------------------------------------------------------------------
# BAPU and space norms


class BAPU:
    """phi_Q = b_I^2 ⊗ b_J^2 and the companion family with widened bells."""

    expansion = 0.6

    def __init__(self, cov: Covering, ramp: Ramp = DEFAULT_RAMP):
        self.cov = cov
        self.ramp = ramp
        for Q in cov.rects:
            for iv in (Q.ix, Q.iy):
                if max(iv.eps_lo, iv.eps_hi) >= (self.expansion - 0.5) * iv.length:
                    raise ValueError(f"cutoff of rect {Q.id} exceeds the {self.expansion} expansion")

    def _b2(self, iv: Interval, xi):
        from .bells import Bell

        return Bell(iv, self.ramp)(xi) ** 2

    def _wide(self, iv: Interval, xi):
        room = (self.expansion - 0.5) * iv.length
        eta_lo = 0.5 * (room - iv.eps_lo)
        eta_hi = 0.5 * (room - iv.eps_hi)
        a = iv.lo - iv.eps_lo - eta_lo
        b = iv.hi + iv.eps_hi + eta_hi
        xi = np.asarray(xi, dtype=float)
        return self.ramp((xi - a) / eta_lo) * self.ramp((b - xi) / eta_hi)

    def phi(self, Q: Rect, xi1, xi2):
        return self._b2(Q.ix, xi1) * self._b2(Q.iy, xi2)

    def phi_tilde(self, Q: Rect, xi1, xi2):
        return self._wide(Q.ix, xi1) * self._wide(Q.iy, xi2)

    def phi_1d(self, iv: Interval, xi):
        return self._b2(iv, xi)

    def expanded(self, Q: Rect) -> tuple[float, float, float, float]:
        return Q.affine_image(self.expansion)

    def partition_sum(self, xi1, xi2):
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        out = np.zeros(np.broadcast(xi1, xi2).shape)
        for Q in self.cov.rects:
            sx, sy = Q.ix.support, Q.iy.support
            m = (xi1 >= sx[0]) & (xi1 <= sx[1]) & (xi2 >= sy[0]) & (xi2 <= sy[1])
            if np.any(m):
                out[m] += self.phi(Q, xi1[m], xi2[m])
        return out


def bapu(cov: Covering, ramp: Ramp = DEFAULT_RAMP) -> BAPU:
    return BAPU(cov, ramp)


def _filtered_energy(system, f, Q: Rect, phis: BAPU):
    A, B = system.op(Q.ix, 0), system.op(Q.iy, 1)
    blk = f.values[A.sl, B.sl] * np.outer(phis.phi_1d(Q.ix, A.xi), phis.phi_1d(Q.iy, B.xi))
    return A, B, blk


def _spatial_axes(system, extent: float, step: float):
    n = int(math.ceil(extent / step))
    x = step * np.arange(-n, n + 1)
    return x


def _space_norm(f, system, hw: HybridWeight, npar: NormParams, kind: str, method: str,
                spatial_extent: float, spatial_step: float | None, mass_tol: float) -> NormResult:
    phis = BAPU(system.cov, system.ramp)
    rects = system.cov.rects
    weights = np.array([hw(*Q.xi) ** npar.s for Q in rects])
    planch = []
    for Q in rects:
        A, B, blk = _filtered_energy(system, f, Q, phis)
        planch.append(float(np.real(np.einsum("i,ij,j->", A.w, np.abs(blk) ** 2, B.w))))
    planch = np.array(planch)
    if method == "auto":
        method = "plancherel" if (npar.p == 2 and npar.q == 2) else "spatial"
    if method == "plancherel":
        if not (npar.p == 2 and npar.q == 2):
            raise ValueError("the Plancherel path needs p == q == 2")
        return NormResult(float(np.sqrt(np.sum(weights**2 * planch))), 0.0, [], "plancherel")

    top = max(abs(system.axis0.hi), abs(system.axis1.hi))
    step = spatial_step or math.pi / (2.0 * top)
    x = _spatial_axes(system, spatial_extent, step)
    dA = step * step
    qinf = math.isinf(npar.q)
    acc = np.zeros((x.size, x.size))
    mnorms = []
    grid_energy = 0.0
    for Q, wq in zip(rects, weights):
        A, B, blk = _filtered_energy(system, f, Q, phis)
        E0 = np.exp(1j * np.outer(x, A.xi)) * (A.w / math.sqrt(2 * math.pi))
        E1 = np.exp(1j * np.outer(x, B.xi)) * (B.w / math.sqrt(2 * math.pi))
        u = np.abs(E0 @ blk @ E1.T) * wq
        grid_energy += float(np.sum(u**2) * dA)
        if kind == "F":
            if qinf:
                np.maximum(acc, u, out=acc)
            else:
                acc += u**npar.q
        else:
            mnorms.append(float(np.sum(u**npar.p) * dA) ** (1.0 / npar.p))
    total_energy = float(np.sum(weights**2 * planch))
    trunc = 0.0 if total_energy == 0 else max(0.0, 1.0 - grid_energy / total_energy)
    warn = []
    if trunc > mass_tol:
        msg = f"spatial box misses {trunc:.2e} of the filtered energy"
        warn.append(msg)
        warnings.warn(msg, TruncationWarning)
    if kind == "F":
        g = acc if qinf else acc ** (1.0 / npar.q)
        val = float(np.sum(g**npar.p) * dA) ** (1.0 / npar.p)
    else:
        m = np.array(mnorms)
        val = float(m.max()) if qinf else float(np.sum(m**npar.q) ** (1.0 / npar.q))
    return NormResult(val, trunc, warn, "spatial")


def tl_norm(f, system, hw: HybridWeight, npar: NormParams, method: str = "auto",
            spatial_extent: float = 16.0, spatial_step: float | None = None, mass_tol: float = 1e-6) -> NormResult:
    """‖(sum_Q |h(xi_Q)^s phi_Q(D) f|^q)^(1/q)‖_{L_p} (sup over Q when q = inf)."""
    return _space_norm(f, system, hw, npar, "F", method, spatial_extent, spatial_step, mass_tol)


def mod_norm(f, system, hw: HybridWeight, npar: NormParams, method: str = "auto",
             spatial_extent: float = 16.0, spatial_step: float | None = None, mass_tol: float = 1e-6) -> NormResult:
    """(sum_Q ‖h(xi_Q)^s phi_Q(D) f‖_{L_p}^q)^(1/q) (sup over Q when q = inf)."""
    return _space_norm(f, system, hw, npar, "M", method, spatial_extent, spatial_step, mass_tol)


def equivalence_experiment(family, system, hw: HybridWeight, npar: NormParams, tail_tol: float = 1e-8) -> dict:
    """sfunc_norm / tl_norm over a family of spectra."""
    ratios = []
    for f in family:
        s = sfunc_norm(f, system, hw, npar, tail_tol=tail_tol).value
        t = tl_norm(f, system, hw, npar).value
        ratios.append(s / t if t > 0 else math.nan)
    r = np.array(ratios)
    ok = r[np.isfinite(r)]
    return {
        "ratios": [float(x) for x in r],
        "min": float(ok.min()) if ok.size else math.nan,
        "max": float(ok.max()) if ok.size else math.nan,
        "spread": float(ok.max() / ok.min()) if ok.size else math.nan,
    }
