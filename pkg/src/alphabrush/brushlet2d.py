"""Tensor brushlets on a covering: projections, analysis, synthesis, Gram
matrices and the telescoping identities behind completeness."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from ._parallel import pmap
from .bells import DEFAULT_RAMP, Ramp
from .brushlet1d import IntervalOperator, TailWarning
from .covering import SIDE_CODE, Covering, Interval, Rect
from .grid import FrequencyAxis, SpectrumGrid

__all__ = [
    "BrushletIndex2D",
    "CoeffMap",
    "BrushletSystem",
    "AnalysisReport",
    "CoverageWarning",
]


class CoverageWarning(UserWarning):
    """Input energy outside the covered annulus."""


@dataclass(frozen=True)
class BrushletIndex2D:
    rect: Rect
    n: tuple[int, int]

    def __post_init__(self):
        if min(self.n) < 0:
            raise ValueError("cosine indices must be >= 0")


RectId = tuple  # (j, side, n_along)


class CoeffMap:
    """Sparse map (rect id, n1, n2) -> complex, stored as one dense block per rect.

    Block ``blocks[rid][n1, n2]`` holds s_{Q,n}; entries outside a block are zero.
    """

    def __init__(self, blocks: dict | None = None):
        self.blocks: dict[RectId, np.ndarray] = {}
        for rid, blk in (blocks or {}).items():
            self.blocks[tuple(rid)] = np.asarray(blk, dtype=complex)

    @staticmethod
    def _key(rid) -> tuple:
        j, side, n = rid
        return (j, SIDE_CODE[side], n)

    def rect_ids(self) -> list:
        return sorted(self.blocks, key=self._key)

    def __len__(self) -> int:
        return int(sum(b.size for b in self.blocks.values()))

    def nnz(self) -> int:
        return int(sum(np.count_nonzero(b) for b in self.blocks.values()))

    def items(self) -> Iterator[tuple[tuple, complex]]:
        """((j, side, n_along, n1, n2), value) in canonical order, nonzeros only."""
        for rid in self.rect_ids():
            blk = self.blocks[rid]
            for n1, n2 in zip(*np.nonzero(blk)):
                yield (*rid, int(n1), int(n2)), complex(blk[n1, n2])

    def arrays(self):
        """Flat (keys, values) with keys a structured list in canonical order."""
        keys, vals = [], []
        for rid in self.rect_ids():
            blk = self.blocks[rid]
            n1, n2 = np.nonzero(blk)
            keys.extend((*rid, int(a), int(b)) for a, b in zip(n1, n2))
            vals.append(blk[n1, n2])
        v = np.concatenate(vals) if vals else np.zeros(0, dtype=complex)
        return keys, v

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[tuple, complex]]) -> "CoeffMap":
        acc: dict = {}
        for (j, side, na, n1, n2), val in entries:
            acc.setdefault((int(j), str(side), int(na)), []).append((int(n1), int(n2), complex(val)))
        blocks = {}
        for rid, lst in acc.items():
            m1 = max(e[0] for e in lst) + 1
            m2 = max(e[1] for e in lst) + 1
            blk = np.zeros((m1, m2), dtype=complex)
            for n1, n2, v in lst:
                blk[n1, n2] += v
            blocks[rid] = blk
        return cls(blocks)

    def get(self, rid, n1: int, n2: int) -> complex:
        blk = self.blocks.get(tuple(rid))
        if blk is None or n1 >= blk.shape[0] or n2 >= blk.shape[1]:
            return 0j
        return complex(blk[n1, n2])

    def energy(self) -> float:
        return float(sum(np.sum(np.abs(b) ** 2) for b in self.blocks.values()))

    def map_values(self, fn) -> "CoeffMap":
        return CoeffMap({rid: fn(blk) for rid, blk in self.blocks.items()})

    def scaled(self, lam: complex) -> "CoeffMap":
        return self.map_values(lambda b: lam * b)

    def copy(self) -> "CoeffMap":
        return self.map_values(np.copy)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoeffMap):
            return NotImplemented
        return list(self.items()) == list(other.items())


@dataclass
class AnalysisReport:
    deficits: dict = field(default_factory=dict)  # rid -> relative Parseval deficit
    n_used: dict = field(default_factory=dict)  # rid -> (N1, N2)
    unmet: list = field(default_factory=list)
    total_energy: float = 0.0
    covered_energy: float = 0.0

    @property
    def max_deficit(self) -> float:
        return max((abs(d) for d in self.deficits.values()), default=0.0)

    @property
    def uncovered_fraction(self) -> float:
        if self.total_energy <= 0:
            return 0.0
        return max(0.0, 1.0 - self.covered_energy / self.total_energy)


class BrushletSystem:
    """Brushlets of a covering sampled on a pair of frequency axes."""

    def __init__(self, cov: Covering, axis0: FrequencyAxis, axis1: FrequencyAxis | None = None,
                 ramp: Ramp = DEFAULT_RAMP, n_cap_max: int = 256):
        self.cov = cov
        self.axis0 = axis0
        self.axis1 = axis0 if axis1 is None else axis1
        self.ramp = ramp
        self.n_cap_max = n_cap_max
        self._ops: dict = {}

    # ---------------------------------------------------------------- cache

    def op(self, iv: Interval, which: int = 0) -> IntervalOperator:
        key = (which, iv.key())
        op = self._ops.get(key)
        if op is None:
            op = IntervalOperator(iv, self.axis0 if which == 0 else self.axis1, self.ramp)
            self._ops[key] = op
        return op

    def caps(self, Q: Rect) -> tuple[int, int]:
        return (min(self.op(Q.ix, 0).n_cap, self.n_cap_max), min(self.op(Q.iy, 1).n_cap, self.n_cap_max))

    # ---------------------------------------------------------- evaluation

    def brushlet2_hat(self, idx: BrushletIndex2D, xi1, xi2):
        from .brushlet1d import BrushletIndex1D, brushlet_hat

        a = brushlet_hat(BrushletIndex1D(idx.rect.ix, idx.n[0]), xi1, self.ramp)
        b = brushlet_hat(BrushletIndex1D(idx.rect.iy, idx.n[1]), xi2, self.ramp)
        return a * b

    def brushlet_grid(self, idx: BrushletIndex2D) -> SpectrumGrid:
        A, B = self.op(idx.rect.ix, 0), self.op(idx.rect.iy, 1)
        out = SpectrumGrid.zeros(self.axis0, self.axis1)
        wa = A.basis(idx.n[0] + 1)[:, idx.n[0]]
        wb = B.basis(idx.n[1] + 1)[:, idx.n[1]]
        out.values[A.sl, B.sl] = np.outer(wa, wb)
        return out

    def _check(self, f: SpectrumGrid):
        if f.axis0 is not self.axis0 or f.axis1 is not self.axis1:
            if len(f.axis0) != len(self.axis0) or not np.array_equal(f.axis0.nodes, self.axis0.nodes) \
                    or not np.array_equal(f.axis1.nodes, self.axis1.nodes):
                raise ValueError("spectrum is sampled on different axes than the brushlet system")

    # ---------------------------------------------------------- projections

    def project_pair(self, I: Interval, J: Interval, f: SpectrumGrid) -> SpectrumGrid:
        """(P_I ⊗ P_J) f, rows first then columns."""
        self._check(f)
        A, B = self.op(I, 0), self.op(J, 1)
        out = SpectrumGrid.zeros(self.axis0, self.axis1)
        blk = f.values[A.sl, B.sl]
        out.values[A.sl, B.sl] = B.apply_local(A.apply_local(blk, 0), 1)
        return out

    def project_rect(self, Q: Rect, f: SpectrumGrid, order: str = "rows") -> SpectrumGrid:
        if order == "rows":
            return self.project_pair(Q.ix, Q.iy, f)
        self._check(f)
        A, B = self.op(Q.ix, 0), self.op(Q.iy, 1)
        out = SpectrumGrid.zeros(self.axis0, self.axis1)
        out.values[A.sl, B.sl] = A.apply_local(B.apply_local(f.values[A.sl, B.sl], 1), 0)
        return out

    def project_square(self, j: int, f: SpectrumGrid) -> SpectrumGrid:
        sq = self.cov.square(j)
        return self.project_pair(sq, sq, f)

    # -------------------------------------------------------------- analysis

    def _analyze_rect(self, Q: Rect, F: np.ndarray, total: float, tail_tol: float, n_start: int):
        A, B = self.op(Q.ix, 0), self.op(Q.iy, 1)
        blk = F[A.sl, B.sl]
        pf = B.apply_local(A.apply_local(blk, 0), 1)
        energy = float(np.real(np.einsum("i,ij,j->", A.w, pf * np.conj(blk), B.w)))
        cap1, cap2 = self.caps(Q)
        wblk = (A.w[:, None] * blk) * B.w[None, :]
        n1 = min(n_start, cap1 + 1)
        n2 = min(n_start, cap2 + 1)
        while True:
            C = A.basis(n1).T @ wblk @ B.basis(n2)
            deficit = (energy - float(np.sum(np.abs(C) ** 2))) / total
            if abs(deficit) <= tail_tol or (n1 > cap1 and n2 > cap2):
                return Q.id, C, deficit, (n1, n2), energy
            n1, n2 = min(2 * n1, cap1 + 1), min(2 * n2, cap2 + 1)

    def analyze(self, f: SpectrumGrid, tail_tol: float = 1e-8, n_start: int = 8, warn: bool = True):
        """Coefficients <f, w_{n,Q}> with a per-rect adaptive cap.

        Each rect starts with an ``n_start x n_start`` block and doubles until
        the Parseval deficit ``<P_Q f, f> - sum |c|^2`` is at most
        ``tail_tol * ||f||^2`` or the grid cap is reached.
        """
        self._check(f)
        total = f.norm() ** 2
        rep = AnalysisReport(total_energy=total)
        if total == 0.0:
            return CoeffMap({Q.id: np.zeros((1, 1), complex) for Q in self.cov.rects}), rep
        F = f.values
        results = pmap(lambda Q: self._analyze_rect(Q, F, total, tail_tol, n_start), self.cov.rects)
        blocks = {}
        for rid, C, d, n_used, energy in results:
            blocks[rid] = C
            rep.deficits[rid] = d
            rep.n_used[rid] = n_used
            rep.covered_energy += energy
            if abs(d) > tail_tol:
                rep.unmet.append(rid)
        if warn and rep.unmet:
            warnings.warn(f"{len(rep.unmet)} rects did not meet the tail tolerance "
                          f"(max deficit {rep.max_deficit:.2e})", TailWarning)
        if warn and rep.uncovered_fraction > max(tail_tol, 1e-12) * 10:
            warnings.warn(f"{rep.uncovered_fraction:.2e} of the input energy lies outside the covered annulus",
                          CoverageWarning)
        return CoeffMap(blocks), rep

    def synthesize(self, coeffs: CoeffMap) -> SpectrumGrid:
        out = SpectrumGrid.zeros(self.axis0, self.axis1)
        for rid in coeffs.rect_ids():
            C = coeffs.blocks[rid]
            if not np.any(C):
                continue
            Q = self.cov.rect(rid)
            A, B = self.op(Q.ix, 0), self.op(Q.iy, 1)
            out.values[A.sl, B.sl] += A.basis(C.shape[0]) @ C @ B.basis(C.shape[1]).T
        return out

    # ------------------------------------------------------------------ gram

    def _inner_1d(self, iv1: Interval, n1: int, iv2: Interval, n2: int, which: int) -> float:
        A, B = self.op(iv1, which), self.op(iv2, which)
        lo, hi = max(A.sl.start, B.sl.start), min(A.sl.stop, B.sl.stop)
        if hi <= lo:
            return 0.0
        wa = A.basis(n1 + 1)[lo - A.sl.start : hi - A.sl.start, n1]
        wb = B.basis(n2 + 1)[lo - B.sl.start : hi - B.sl.start, n2]
        w = (self.axis0 if which == 0 else self.axis1).weights[lo:hi]
        return float(np.sum(w * wa * wb))

    def gram(self, subset: list[BrushletIndex2D]) -> np.ndarray:
        """Pairwise <w_a, w_b> from separable 1-D quadratures.

        Pairs with disjoint supports along either axis give exact zeros.
        """
        m = len(subset)
        G = np.zeros((m, m))
        for a in range(m):
            qa = subset[a]
            for b in range(a, m):
                qb = subset[b]
                g1 = self._inner_1d(qa.rect.ix, qa.n[0], qb.rect.ix, qb.n[0], 0)
                g = 0.0 if g1 == 0.0 else g1 * self._inner_1d(qa.rect.iy, qa.n[1], qb.rect.iy, qb.n[1], 1)
                G[a, b] = G[b, a] = g
        return G

    # ----------------------------------------------------------- telescoping

    def chain(self) -> list[tuple[int, int]]:
        """(j, predecessor) pairs: A_prev is the inner square of annulus j."""
        act = self.cov.active_levels
        out = []
        for j in act:
            if j == self.cov.params.j_min:
                prev = j - 1
            elif j == 2:
                prev = -1
            else:
                prev = j - 1
            out.append((j, prev))
        return out

    def telescoping_check(self, f: SpectrumGrid) -> dict:
        """Deviation of P_{A_prev}^2 + sum_{Q in annulus j} P_Q = P_{A_j}^2 per level,
        and of the summed identity over the whole truncation."""
        per_level = {}
        total = SpectrumGrid.zeros(self.axis0, self.axis1).values
        scale = max(float(np.max(np.abs(f.values))), np.finfo(float).tiny)
        for j, prev in self.chain():
            acc = self.project_square(prev, f).values.copy()
            ring = np.zeros_like(acc)
            for Q in self.cov.annuli[j]:
                A, B = self.op(Q.ix, 0), self.op(Q.iy, 1)
                ring[A.sl, B.sl] += B.apply_local(A.apply_local(f.values[A.sl, B.sl], 0), 1)
            acc += ring
            total += ring
            dev = np.max(np.abs(acc - self.project_square(j, f).values)) / scale
            per_level[j] = float(dev)
        top = self.cov.active_levels[-1]
        summed = self.project_square(top, f).values - self.project_square(self.cov.params.j_min - 1, f).values
        return {
            "per_level": per_level,
            "max_level_deviation": max(per_level.values()),
            "summed_deviation": float(np.max(np.abs(total - summed)) / scale),
        }

    def side_sum_check(self, j: int, side: str, f: SpectrumGrid) -> float:
        """Deviation of sum_{Q in side} P_Q from the fused-interval tensor projection."""
        ivs = self.cov.levels[j]
        sq = self.cov.square(j)
        acc = np.zeros((len(self.axis0), len(self.axis1)), dtype=complex)
        for Q in self.cov.annuli[j]:
            if Q.side == side:
                acc += self.project_rect(Q, f).values
        if side == "L":
            ref = self.project_pair(ivs[0], sq, f)
        elif side == "R":
            ref = self.project_pair(ivs[-1], sq, f)
        else:
            mid = Interval(ivs[1].lo, ivs[-2].hi, ivs[1].eps_lo, ivs[-2].eps_hi, j, 0)
            ref = self.project_pair(mid, ivs[-1] if side == "T" else ivs[0], f)
        scale = max(float(np.max(np.abs(f.values))), np.finfo(float).tiny)
        return float(np.max(np.abs(acc - ref.values)) / scale)
