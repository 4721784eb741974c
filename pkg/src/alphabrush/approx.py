"""m-term approximation by coefficient thresholding."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .brushlet2d import CoeffMap
from .covering import SIDE_CODE

__all__ = ["MTermPlan", "rank_entries", "threshold_m", "error_curve", "tail_curve", "fit_rate"]


@dataclass(frozen=True)
class MTermPlan:
    m_values: tuple
    weight_mode: str = "l2"  # "l2" or "fnorm"
    s: float = 0.0
    alpha: float = 0.5

    def __post_init__(self):
        mv = tuple(int(m) for m in self.m_values)
        if any(m <= 0 for m in mv) or any(b <= a for a, b in zip(mv, mv[1:])):
            raise ValueError("m_values must be positive and strictly increasing")
        if self.weight_mode not in ("l2", "fnorm"):
            raise ValueError(f"unknown weight mode {self.weight_mode!r}")
        object.__setattr__(self, "m_values", mv)


def _flat(coeffs: CoeffMap, cov=None, mode: str = "l2", s: float = 0.0, hw=None):
    keys, vals = coeffs.arrays()
    mag = np.abs(vals)
    if mode == "fnorm":
        from .spaces import HybridWeight

        if cov is None:
            raise ValueError("fnorm ranking needs the covering")
        hw = hw or HybridWeight(cov.params.alpha)
        scale = {}
        for rid in coeffs.rect_ids():
            Q = cov.rect(rid)
            scale[rid] = hw(*Q.xi) ** s * math.sqrt(Q.area)
        mag = mag * np.array([scale[k[:3]] for k in keys])
    return keys, vals, mag


def rank_entries(keys, mag) -> np.ndarray:
    """Indices sorted by decreasing magnitude, ties by (j, side, n_along, n1, n2)."""
    if not keys:
        return np.zeros(0, dtype=int)
    k = np.array([(j, SIDE_CODE[s], na, n1, n2) for j, s, na, n1, n2 in keys])
    # lexsort uses the last key as primary
    return np.lexsort((k[:, 4], k[:, 3], k[:, 2], k[:, 1], k[:, 0], -mag))


def threshold_m(coeffs: CoeffMap, m: int, mode: str = "l2", cov=None, s: float = 0.0, hw=None) -> CoeffMap:
    """The ``m`` largest entries under the chosen ranking."""
    if m < 0:
        raise ValueError("m must be >= 0")
    keys, vals, mag = _flat(coeffs, cov, mode, s, hw)
    order = rank_entries(keys, mag)[:m]
    return CoeffMap.from_entries((keys[i], vals[i]) for i in sorted(order))


def tail_curve(coeffs: CoeffMap, m_values, total_energy: float) -> list[tuple[int, float]]:
    """(m, sqrt(sum_{rank > m} |c|^2) / ||f||) for L2 ranking."""
    keys, vals, mag = _flat(coeffs)
    e = np.sort(mag**2)[::-1]
    csum = np.concatenate([[0.0], np.cumsum(e)])
    out = []
    for m in m_values:
        kept = csum[min(m, e.size)]
        out.append((int(m), math.sqrt(max(0.0, csum[-1] - kept) / total_energy)))
    return out


def error_curve(f, system, plan: MTermPlan, coeffs: CoeffMap | None = None, tail_tol: float = 1e-10):
    """Relative L2 error of the m-term reconstruction for each m in the plan.

    Returns a dict with the curve, the matching Parseval tail and a fitted
    log-log decay rate.
    """
    if coeffs is None:
        coeffs, _ = system.analyze(f, tail_tol=tail_tol, warn=False)
    norm = f.norm()
    curve = []
    for m in plan.m_values:
        cm = threshold_m(coeffs, m, plan.weight_mode, system.cov, plan.s)
        g = system.synthesize(cm)
        curve.append((m, g.like(g.values - f.values).norm() / norm))
    tail = tail_curve(coeffs, plan.m_values, norm**2)
    return {"curve": curve, "tail": tail, "rate": fit_rate(curve)}


def fit_rate(curve) -> float | None:
    pts = [(m, e) for m, e in curve if e > 0]
    if len(pts) < 2:
        return None
    x = np.log([m for m, _ in pts])
    y = np.log([e for _, e in pts])
    return float(-np.polyfit(x, y, 1)[0])
