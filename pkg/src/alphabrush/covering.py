"""Truncated homogeneous alpha-covering of the frequency plane.

The covering is built level by level.  Level ``j >= 1`` subdivides the square
``A_j = [-j**beta, j**beta]`` and level ``j <= -1`` subdivides
``A_j = [-|j|**-beta, |j|**-beta]``, with ``beta = 1 / (1 - alpha)``.  Each
level contributes a rectangular annulus (sides L, R, T, B) of tensor
rectangles; the annuli tile ``{r_in <= |xi|_inf <= r_out}``.

Level 1 is degenerate: its inner square collapses to the origin and its
outer square coincides with the outer square of level -1, so the annulus
between them is empty.  The seam at ``|xi|_inf = 1`` glues level -1 to
level 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "AlphaParams",
    "Interval",
    "Rect",
    "Covering",
    "CoveringError",
    "ValidationThresholds",
    "ValidationReport",
    "SIDES",
    "knot_sequence",
    "assign_epsilons",
    "build_annulus",
    "build_covering",
    "validate_covering",
    "covering_to_json",
    "covering_from_json",
    "register_knot_rule",
]

SIDES = ("L", "R", "T", "B")
SIDE_CODE = {s: i for i, s in enumerate(SIDES)}

EPS_FACTOR = 1.0 / 100.0


class CoveringError(ValueError):
    """Invalid covering parameters or a covering that violates its invariants."""


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class AlphaParams:
    alpha: float = 0.5
    r1: float = 1.0
    j_min: int = -2
    j_max: int = 4
    eps_rule: str = "hybrid"
    knot_rule: str = "equispaced"

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise CoveringError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.j_min > -1 or self.j_max < 1:
            raise CoveringError(
                f"need j_min <= -1 <= 1 <= j_max, got [{self.j_min}, {self.j_max}]"
            )
        if not self.r1 > 0:
            raise CoveringError("r1 must be positive")
        m = round(1.0 / self.r1)
        if m < 1 or abs(1.0 / self.r1 - m) > 1e-9:
            raise CoveringError(f"r1 must be of the form 1/m, got {self.r1}")
        if self.eps_rule not in ("hybrid", "literal"):
            raise CoveringError(f"unknown eps_rule {self.eps_rule!r}")
        if self.knot_rule not in _KNOT_RULES:
            raise CoveringError(f"unknown knot_rule {self.knot_rule!r}")

    @property
    def beta(self) -> float:
        return 1.0 / (1.0 - self.alpha)

    @property
    def m(self) -> int:
        return round(1.0 / self.r1)

    def n_levels(self, j: int) -> int:
        """N_j = |j| / r1."""
        return abs(j) * self.m

    @property
    def levels(self) -> list[int]:
        return list(range(self.j_min, 0)) + list(range(1, self.j_max + 1))


def _radius(params: AlphaParams, k: int, high: bool) -> float:
    # Single closed form for every square edge so that knots shared between
    # levels compare bit-exactly.
    if k == 0:
        return 0.0
    p = float(k) ** params.beta
    return p if high else 1.0 / p


def _equispaced(inner: float, n_intervals: int) -> list[float]:
    # Mirror the positive half so the knot set is exactly symmetric.
    step = 2.0 * inner / n_intervals
    half = [inner - step * i for i in range(n_intervals // 2 + 1)]
    pos = [x for x in half if x > 0.0]
    return [-x for x in pos] + pos[::-1] if n_intervals % 2 else [-x for x in pos] + [0.0] + pos[::-1]


_KNOT_RULES: dict[str, Callable[[float, int], list[float]]] = {"equispaced": _equispaced}


def register_knot_rule(name: str, rule: Callable[[float, int], list[float]]) -> None:
    """Register an interior-knot strategy.

    ``rule(inner, n_intervals)`` must return the increasing knots subdividing
    ``[-inner, inner]`` into ``n_intervals`` pieces, endpoints included.
    """
    _KNOT_RULES[name] = rule


# ---------------------------------------------------------------------------
# intervals and rectangles


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    eps_lo: float
    eps_hi: float
    level: int = 0
    index: int = 0

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def support(self) -> tuple[float, float]:
        return self.lo - self.eps_lo, self.hi + self.eps_hi

    @property
    def plateau(self) -> tuple[float, float]:
        return self.lo + self.eps_lo, self.hi - self.eps_hi

    def key(self) -> tuple[float, float, float, float]:
        return (self.lo, self.hi, self.eps_lo, self.eps_hi)


def fuse(first: Interval, second: Interval, level: int = 0, index: int = 0) -> Interval:
    """Union of two adjacent compatible intervals, keeping the outer cutoffs."""
    if first.hi != second.lo or first.eps_hi != second.eps_lo:
        raise CoveringError("intervals are not adjacent and compatible")
    return Interval(first.lo, second.hi, first.eps_lo, second.eps_hi, level, index)


@dataclass(frozen=True)
class Rect:
    ix: Interval
    iy: Interval
    level: int
    side: str
    n_along: int

    @property
    def id(self) -> tuple[int, str, int]:
        return (self.level, self.side, self.n_along)

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.level, SIDE_CODE[self.side], self.n_along)

    @property
    def xi(self) -> tuple[float, float]:
        return (0.5 * (self.ix.lo + self.ix.hi), 0.5 * (self.iy.lo + self.iy.hi))

    @property
    def delta(self) -> tuple[float, float]:
        return (self.ix.length, self.iy.length)

    @property
    def area(self) -> float:
        return self.ix.length * self.iy.length

    def affine_image(self, half_width: float = 0.5) -> tuple[float, float, float, float]:
        """``delta_Q([-h, h]^2) + xi_Q`` as (x0, x1, y0, y1)."""
        (cx, cy), (dx, dy) = self.xi, self.delta
        return (cx - half_width * dx, cx + half_width * dx, cy - half_width * dy, cy + half_width * dy)

    def eccentricity(self) -> float:
        a, b = self.delta
        return max(a, b) / min(a, b)


# ---------------------------------------------------------------------------
# construction


def knot_sequence(params: AlphaParams, j: int) -> list[float]:
    """Knots ``r_{j,-N_j}, ..., r_{j,N_j+1}`` of level ``j``.

    The outer two knots on each side are fixed by gluing to the neighbouring
    levels; the interior knots come from ``params.knot_rule``.  At ``j = 1``
    the interior square has radius zero and only ``[-1, 0, 1]`` is returned.
    """
    if j == 0:
        raise CoveringError("level 0 does not exist")
    if not (params.j_min <= j <= params.j_max):
        raise CoveringError(f"level {j} outside truncation range [{params.j_min}, {params.j_max}]")
    if j > 0:
        outer, inner = _radius(params, j, True), _radius(params, j - 1, True)
    else:
        outer, inner = _radius(params, -j, False), _radius(params, -j + 1, False)
    if inner == 0.0:
        return [-outer, 0.0, outer]
    n = params.n_levels(j)
    interior = _KNOT_RULES[params.knot_rule](inner, 2 * n - 1)
    if len(interior) != 2 * n or interior[0] != -inner or interior[-1] != inner:
        raise CoveringError(f"knot rule {params.knot_rule!r} returned an invalid subdivision")
    return [-outer] + list(interior) + [outer]


def pure_weight(params: AlphaParams, t: float) -> float:
    """``t**alpha`` above 1 and ``t**(2 - alpha)`` below 1."""
    t = abs(t)
    return t**params.alpha if t >= 1.0 else t ** (2.0 - params.alpha)


def assign_epsilons(knots: Sequence[float], params: AlphaParams, j: int = 0,
                    strict: bool | None = None) -> list[Interval]:
    """Attach cutoff radii to the intervals between consecutive ``knots``.

    Under the ``hybrid`` rule, knots shared with neighbouring levels (the
    outer two on each side) get ``pure_weight(|r|) / 100`` and every other
    knot gets one hundredth of the shorter adjacent interval.  The
    ``literal`` rule uses ``|r|**alpha / 100`` at every knot.

    ``strict`` (default: on for the hybrid rule, off for the literal one)
    raises on cutoffs that are not positive or do not fit the interval;
    without it such intervals are kept so that validation can report them.
    """
    if strict is None:
        strict = params.eps_rule != "literal"
    knots = [float(k) for k in knots]
    if any(b <= a for a, b in zip(knots, knots[1:])):
        raise CoveringError("knots must be strictly increasing")
    nk = len(knots)
    shared = {0, nk - 1}
    if nk > 3:
        shared |= {1, nk - 2}
    eps = []
    for i, r in enumerate(knots):
        if params.eps_rule == "literal":
            e = EPS_FACTOR * abs(r) ** params.alpha
        elif i in shared:
            e = EPS_FACTOR * pure_weight(params, r)
        else:
            e = EPS_FACTOR * min(knots[i] - knots[i - 1], knots[i + 1] - knots[i])
        eps.append(e)
    n_half = (nk - 2) // 2
    if nk == 3:
        indices = [-params.n_levels(j), params.n_levels(j)] if j else [-1, 1]
    else:
        indices = list(range(-n_half, n_half + 1))
    out = []
    for i, idx in enumerate(indices):
        iv = Interval(knots[i], knots[i + 1], eps[i], eps[i + 1], j, idx)
        if not strict:
            out.append(iv)
            continue
        if iv.eps_lo <= 0 or iv.eps_hi <= 0:
            raise CoveringError(f"non-positive cutoff on interval [{iv.lo}, {iv.hi}] of level {j}")
        if iv.eps_lo + iv.eps_hi > iv.length * (1.0 + 1e-12):
            raise CoveringError(
                f"eps_lo + eps_hi = {iv.eps_lo + iv.eps_hi:.6g} exceeds |I| = {iv.length:.6g} "
                f"on interval [{iv.lo:.6g}, {iv.hi:.6g}] of level {j}"
            )
        out.append(iv)
    return out


def build_annulus(levels: dict[int, Sequence[Interval]], j: int) -> list[Rect]:
    """Rectangles of the annulus of level ``j`` (empty for ``j`` in {0, 1})."""
    if j == 0 or j not in levels:
        return []
    ivs = list(levels[j])
    if len(ivs) < 3:
        # degenerate level 1: the ring between A_{-1} and A_1 is empty
        return []
    first, last = ivs[0], ivs[-1]
    rects = [Rect(first, iv, j, "L", iv.index) for iv in ivs]
    rects += [Rect(last, iv, j, "R", iv.index) for iv in ivs]
    rects += [Rect(iv, last, j, "T", iv.index) for iv in ivs[1:-1]]
    rects += [Rect(iv, first, j, "B", iv.index) for iv in ivs[1:-1]]
    return rects


@dataclass(frozen=True)
class Covering:
    params: AlphaParams
    levels: dict[int, tuple[Interval, ...]]
    annuli: dict[int, tuple[Rect, ...]]
    rects: tuple[Rect, ...] = field(default=())

    def rect(self, rect_id: tuple[int, str, int]) -> Rect:
        return self._index()[tuple(rect_id)]

    def _index(self) -> dict:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {r.id: r for r in self.rects}
            object.__setattr__(self, "_idx", idx)
        return idx

    @property
    def active_levels(self) -> list[int]:
        return [j for j in sorted(self.annuli) if self.annuli[j]]

    def square(self, j: int) -> Interval:
        """The fused interval A_j with the cutoffs of its end knots."""
        if j == 0:
            raise CoveringError("A_0 is not defined")
        p = self.params
        r = _radius(p, j, True) if j > 0 else _radius(p, -j, False)
        if p.eps_rule == "literal":
            e = EPS_FACTOR * r**p.alpha
        else:
            e = EPS_FACTOR * pure_weight(p, r)
        return Interval(-r, r, e, e, j, 0)

    @property
    def inner_square(self) -> Interval:
        """A_{j_min - 1}, the uncovered hole around the origin."""
        return self.square(self.params.j_min - 1)

    @property
    def outer_square(self) -> Interval:
        top = max(self.active_levels)
        return self.square(top)

    def axis_intervals(self) -> list[Interval]:
        """Distinct 1-D factors used by at least one rectangle."""
        seen = {}
        for r in self.rects:
            for iv in (r.ix, r.iy):
                seen.setdefault(iv.key(), iv)
        return sorted(seen.values(), key=lambda iv: (iv.lo, iv.hi))

    def axis_knots(self) -> list[tuple[float, float]]:
        """Distinct (knot, eps) pairs on one frequency axis, including the
        inner and outer square edges used by the telescoping projections."""
        kn = {}
        for iv in self.axis_intervals() + [self.inner_square, self.outer_square]:
            for r, e in ((iv.lo, iv.eps_lo), (iv.hi, iv.eps_hi)):
                if r in kn and kn[r] != e:
                    raise CoveringError(f"knot {r} carries two different cutoffs {kn[r]} and {e}")
                kn[r] = e
        return sorted(kn.items())

    def contains(self, xi1, xi2, closed: bool = True) -> np.ndarray:
        """Count of rectangles containing each point."""
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        count = np.zeros(np.broadcast(xi1, xi2).shape, dtype=int)
        for r in self.rects:
            if closed:
                m = (xi1 >= r.ix.lo) & (xi1 <= r.ix.hi) & (xi2 >= r.iy.lo) & (xi2 <= r.iy.hi)
            else:
                m = (xi1 > r.ix.lo) & (xi1 < r.ix.hi) & (xi2 > r.iy.lo) & (xi2 < r.iy.hi)
            count += m
        return count


def build_covering(params: AlphaParams) -> Covering:
    levels = {}
    for j in params.levels:
        levels[j] = tuple(assign_epsilons(knot_sequence(params, j), params, j))
    annuli = {j: tuple(build_annulus(levels, j)) for j in params.levels}
    rects = tuple(sorted((r for j in annuli for r in annuli[j]), key=lambda r: r.sort_key))
    return Covering(params, levels, annuli, rects)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationThresholds:
    n0_max: int = 9
    exponent_tol: float = 0.1
    c_min: float = 0.0
    k_max: float = 10.0


@dataclass
class ValidationReport:
    n0: int
    n0_edge: int
    moderation_a: float
    moderation_area: float
    eps_c: float
    eps_ok: bool
    eccentricity_k: float
    qrule_lo: float
    qrule_hi: float
    fit_high: float | None
    fit_low: float | None
    gluing_ok: bool
    thresholds: ValidationThresholds
    flags: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        return {
            "n0": self.n0,
            "n0_edge": self.n0_edge,
            "moderation_a": self.moderation_a,
            "moderation_area": self.moderation_area,
            "eps_c": self.eps_c,
            "eps_ok": self.eps_ok,
            "eccentricity_k": self.eccentricity_k,
            "qrule_lo": self.qrule_lo,
            "qrule_hi": self.qrule_hi,
            "fit_high": self.fit_high,
            "fit_low": self.fit_low,
            "gluing_ok": self.gluing_ok,
            "flags": dict(self.flags),
            "passed": self.passed,
        }


def _touch_counts(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # closed-set intersections, and neighbours sharing an edge of positive length
    olo = np.maximum(lo[:, None, :], lo[None, :, :])
    ohi = np.minimum(hi[:, None, :], hi[None, :, :])
    gap = ohi - olo
    scale = np.maximum(hi - lo, 0).min()
    tol = 1e-12 * max(1.0, np.abs(hi).max())
    closed = np.all(gap >= -tol, axis=2)
    pos = gap > max(tol, 1e-9 * scale)
    edge = closed & (pos[:, :, 0] ^ pos[:, :, 1])
    return closed.sum(axis=1), edge.sum(axis=1)


def _check_gluing(cov: Covering) -> bool:
    p = cov.params
    for j in cov.levels:
        ivs = cov.levels[j]
        if len(ivs) < 3:
            continue
        nxt = j + 1 if j != -1 else 2
        if nxt not in cov.levels or len(cov.levels[nxt]) < 3:
            continue
        outer = (ivs[0].lo, ivs[-1].hi)
        inner_next = (cov.levels[nxt][0].hi, cov.levels[nxt][-1].lo)
        if outer != inner_next:
            return False
        if (ivs[0].eps_lo, ivs[-1].eps_hi) != (cov.levels[nxt][0].eps_hi, cov.levels[nxt][-1].eps_lo):
            return False
    del p
    return True


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float | None:
    if len(x) < 2 or np.ptp(x) == 0:
        return None
    return float(np.polyfit(x, y, 1)[0])


def validate_covering(cov: Covering, thresholds: ValidationThresholds | None = None, weight=None) -> ValidationReport:
    """Measure the admissibility constants of ``cov``.

    ``weight`` is a callable ``h(xi1, xi2)``; defaults to the hybrid weight
    for ``cov.params.alpha``.
    """
    th = thresholds or ValidationThresholds()
    if weight is None:
        from .spaces import HybridWeight

        weight = HybridWeight(cov.params.alpha)
    rects = cov.rects
    if not rects:
        raise CoveringError("covering has no rectangles")
    lo = np.array([[r.ix.lo, r.iy.lo] for r in rects])
    hi = np.array([[r.ix.hi, r.iy.hi] for r in rects])
    closed, edge = _touch_counts(lo, hi)
    n0, n0_edge = int(closed.max()), int(edge.max()) + 1

    # moderation along each axis family and across touching rectangles
    ratios = [1.0]
    for j, ivs in cov.levels.items():
        if len(ivs) < 3:
            continue
        for a, b in zip(ivs, ivs[1:]):
            ratios.append(max(a.length / b.length, b.length / a.length))
        nxt = j + 1 if j != -1 else 2
        if nxt in cov.levels and len(cov.levels[nxt]) >= 3:
            a, b = ivs[-1], cov.levels[nxt][-1]
            ratios.append(max(a.length / b.length, b.length / a.length))
    areas = np.array([r.area for r in rects])
    olo = np.maximum(lo[:, None, :], lo[None, :, :])
    ohi = np.minimum(hi[:, None, :], hi[None, :, :])
    touch = np.all(ohi - olo >= -1e-12 * max(1.0, np.abs(hi).max()), axis=2)
    ar = areas[:, None] / areas[None, :]
    moderation_area = float(ar[touch].max())

    eps_c = math.inf
    eps_ok = True
    # every interval of every level family, including the degenerate level 1
    # that carries no rectangles
    family = [iv for ivs in cov.levels.values() for iv in ivs]
    family += [iv for r in rects for iv in (r.ix, r.iy)]
    for iv in family:
        eps_c = min(eps_c, iv.eps_lo / iv.length, iv.eps_hi / iv.length)
        eps_ok &= iv.eps_lo > 0 and iv.eps_hi > 0 and iv.eps_lo + iv.eps_hi <= iv.length * (1 + 1e-12)
    ecc = float(max(r.eccentricity() for r in rects))

    # |Q|^(1/2) / h(xi) over a 5x5 sample of each closed rectangle
    s = np.linspace(0.0, 1.0, 5)
    qlo, qhi = math.inf, 0.0
    for r in rects:
        x = r.ix.lo + s * r.ix.length
        y = r.iy.lo + s * r.iy.length
        X, Y = np.meshgrid(x, y, indexing="ij")
        ok = (X != 0) | (Y != 0)
        h = weight(X[ok], Y[ok])
        q = math.sqrt(r.area) / h
        qlo, qhi = min(qlo, float(q.min())), max(qhi, float(q.max()))

    xi = np.array([r.xi for r in rects])
    js = np.array([r.level for r in rects])
    logx = np.log(np.hypot(xi[:, 0], xi[:, 1]))
    loga = np.log(areas)
    fit_high = _fit_slope(logx[js > 0], loga[js > 0])
    fit_low = _fit_slope(logx[js < 0], loga[js < 0])
    gluing_ok = _check_gluing(cov)

    alpha = cov.params.alpha
    long_enough = cov.params.j_max >= 8 and cov.params.j_min <= -4
    flags = {
        "n0": n0 <= th.n0_max,
        "epsilon": eps_ok and eps_c > th.c_min,
        "eccentricity": ecc <= th.k_max,
        "qrule": math.isfinite(qlo) and qlo > 0 and math.isfinite(qhi),
        "gluing": gluing_ok,
    }
    if long_enough:
        flags["geom_high"] = fit_high is not None and abs(fit_high - 2 * alpha) <= th.exponent_tol
        flags["geom_low"] = fit_low is not None and abs(fit_low - 2 * (2 - alpha)) <= th.exponent_tol
    return ValidationReport(
        n0=n0,
        n0_edge=n0_edge,
        moderation_a=float(max(ratios)),
        moderation_area=moderation_area,
        eps_c=float(eps_c),
        eps_ok=bool(eps_ok),
        eccentricity_k=ecc,
        qrule_lo=float(qlo),
        qrule_hi=float(qhi),
        fit_high=fit_high,
        fit_low=fit_low,
        gluing_ok=gluing_ok,
        thresholds=th,
        flags=flags,
    )


# ---------------------------------------------------------------------------
# JSON export


def _num(x: float) -> str:
    return format(float(x), ".17g")


def covering_to_json(cov: Covering) -> str:
    p = cov.params
    doc = {
        "alpha": p.alpha,
        "r1": p.r1,
        "eps_rule": p.eps_rule,
        "knot_rule": p.knot_rule,
        "j_range": [p.j_min, p.j_max],
        "levels": [],
        "rects": [],
    }
    for j in sorted(cov.levels):
        ivs = cov.levels[j]
        knots = [ivs[0].lo] + [iv.hi for iv in ivs]
        eps = [ivs[0].eps_lo] + [iv.eps_hi for iv in ivs]
        doc["levels"].append({"j": j, "knots": [_num(k) for k in knots], "eps": [_num(e) for e in eps]})
    for r in cov.rects:
        doc["rects"].append(
            {
                "j": r.level,
                "side": r.side,
                "n": r.n_along,
                "ix": [_num(r.ix.lo), _num(r.ix.hi)],
                "iy": [_num(r.iy.lo), _num(r.iy.hi)],
                "eps": [_num(e) for e in (r.ix.eps_lo, r.ix.eps_hi, r.iy.eps_lo, r.iy.eps_hi)],
                "xi": [_num(c) for c in r.xi],
            }
        )
    return json.dumps(doc, indent=1) + "\n"


def covering_from_json(text: str) -> Covering:
    """Rebuild a covering from its JSON export.

    Intervals come from the stored knots and cutoffs; the rectangle list is
    checked against the annuli rebuilt from those levels.
    """
    try:
        doc = json.loads(text)
        jmin, jmax = doc["j_range"]
        params = AlphaParams(
            alpha=float(doc["alpha"]),
            r1=float(doc["r1"]),
            j_min=int(jmin),
            j_max=int(jmax),
            eps_rule=doc.get("eps_rule", "hybrid"),
            knot_rule=doc.get("knot_rule", "equispaced"),
        )
        levels = {}
        for lv in doc["levels"]:
            j = int(lv["j"])
            knots = [float(k) for k in lv["knots"]]
            eps = [float(e) for e in lv["eps"]]
            if len(eps) != len(knots):
                raise CoveringError(f"level {j}: knots and eps differ in length")
            nk = len(knots)
            n_half = (nk - 2) // 2
            if nk == 3:
                idx = [-params.n_levels(j), params.n_levels(j)]
            else:
                idx = list(range(-n_half, n_half + 1))
            levels[j] = tuple(
                Interval(knots[i], knots[i + 1], eps[i], eps[i + 1], j, idx[i]) for i in range(nk - 1)
            )
        rect_docs = doc["rects"]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CoveringError):
            raise
        raise CoveringError(f"malformed covering document: {exc}") from exc
    annuli = {j: tuple(build_annulus(levels, j)) for j in sorted(levels)}
    rects = tuple(sorted((r for j in annuli for r in annuli[j]), key=lambda r: r.sort_key))
    if len(rects) != len(rect_docs):
        raise CoveringError("rectangle list does not match the levels")
    for r, d in zip(rects, sorted(rect_docs, key=lambda d: (d["j"], SIDE_CODE[d["side"]], d["n"]))):
        if (r.level, r.side, r.n_along) != (d["j"], d["side"], d["n"]):
            raise CoveringError(f"unexpected rectangle {d['j'], d['side'], d['n']}")
        if [float(v) for v in d["ix"]] != [r.ix.lo, r.ix.hi] or [float(v) for v in d["iy"]] != [r.iy.lo, r.iy.hi]:
            raise CoveringError(f"rectangle {r.id} does not match its level knots")
    return Covering(params, levels, annuli, rects)
