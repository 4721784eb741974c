"""End-to-end acceptance checks on the default configuration.

Every criterion records one PASS/FAIL line (printed in the terminal summary)
before asserting, so a failing criterion still reports its measured value.
"""

import json
import math
import time
import warnings

import numpy as np
import pytest

from conftest import BOUNDS, record

from alphabrush.approx import MTermPlan, error_curve
from alphabrush.bells import Ramp
from alphabrush.brushlet1d import IntervalOperator
from alphabrush.brushlet2d import BrushletSystem, CoeffMap
from alphabrush.config import RunConfig
from alphabrush.covering import AlphaParams, build_covering, fuse, validate_covering
from alphabrush.signals import annulus_window, plateau_bumps, random_bumps, standard_family
from alphabrush.spaces import (HybridWeight, NormParams, equivalence_experiment, sequence_norm,
                               single_coefficient_norm)
from alphabrush.verify import report_json, run_verify

CFG = RunConfig()


@pytest.fixture(scope="module")
def reports():
    """Two full verify runs with the same seed: (parsed report, json a, json b)."""
    a = report_json(run_verify(CFG))
    b = report_json(run_verify(CFG))
    return json.loads(a), a, b


def check(rep, suite, name):
    return next(c for c in rep["suites"][suite]["checks"] if c["name"] == name)


@pytest.fixture(scope="module")
def windowed_system():
    cov = CFG.covering()
    win = annulus_window(cov)
    return BrushletSystem(cov, CFG.grid.axis(cov, features=win.features)), win


def rel_err(f, g):
    return g.like(g.values - f.values).norm() / f.norm()


# ---------------------------------------------------------------------------


def test_criterion_01_ramp_identity():
    rho = Ramp(CFG.ramp_order)
    xi = np.linspace(-1.5, 1.5, 100_000)
    t0 = time.perf_counter()
    err = float(np.max(np.abs(rho(xi) ** 2 + rho(-xi) ** 2 - 1.0)))
    dt = time.perf_counter() - t0
    ok = err <= 1e-12 and dt < 1.0
    record(1, ok, f"max dev {err:.2e} (<= 1e-12) on 1e5 points in {dt * 1e3:.1f} ms")
    assert ok


def test_criterion_02_bell_compatibility(reports):
    c = check(reports[0], "bells", "bell_compatibility")
    ok = c["passed"] and c["measured"] <= 1e-12
    record(2, ok, f"max |b_I^2 + b_J^2 - 1| = {c['measured']:.2e} (<= 1e-12) over all adjacent pairs")
    assert ok


def test_criterion_03_projection_algebra(reports, windowed_system):
    sysm, win = windowed_system
    cov = sysm.cov
    rng = np.random.default_rng([CFG.seed, 3])
    f = random_bumps(cov, rng, window=win).on(sysm.axis0).values
    g = random_bumps(cov, rng, window=win).on(sysm.axis0).values
    scale = float(np.max(np.abs(f)))
    w = sysm.axis0.weights
    worst = {"sum": 0.0, "fusion": 0.0, "idempotent": 0.0, "adjoint": 0.0}
    for j in (-2, 2, 3, 4):
        ivs = cov.levels[j]
        for I, J in zip(ivs, ivs[1:]):
            A, B, U = (IntervalOperator(iv, sysm.axis0) for iv in (I, J, fuse(I, J)))
            PA, PB = A.apply(f), B.apply(f)
            plate = sysm.axis0.support_slice(I.lo + I.eps_lo, J.hi - J.eps_hi)
            worst["sum"] = max(worst["sum"], float(np.max(np.abs((PA + PB - f)[plate]))) / scale)
            worst["fusion"] = max(worst["fusion"], float(np.max(np.abs(PA + PB - U.apply(f)))) / scale)
            worst["idempotent"] = max(worst["idempotent"], float(np.max(np.abs(A.apply(PA) - PA))) / scale)
            lhs = np.einsum("i,ij,ij->j", w, PA, np.conj(g))
            rhs = np.einsum("i,ij,ij->j", w, f, np.conj(A.apply(g)))
            worst["adjoint"] = max(worst["adjoint"], float(np.max(np.abs(lhs - rhs))) / scale**2)
    gl = {c["name"]: c["measured"] for c in reports[0]["suites"]["gluing"]["checks"]}
    ok = max(worst.values()) <= 1e-10 and reports[0]["suites"]["gluing"]["passed"]
    record(3, ok, "band-limited: " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + f"; noise suite max {max(gl.values()):.1e} (<= 1e-10)")
    assert ok


def test_criterion_04_orthonormality(reports):
    off = check(reports[0], "gram", "gram_offdiag")
    diag = check(reports[0], "gram", "gram_diag")
    seams = {-1, 2} <= set(off["levels"])
    ok = off["size"] >= 200 and seams and off["measured"] <= 1e-7 and diag["measured"] <= 1e-6
    record(4, ok, f"{off['size']} elements, levels {off['levels']}: off-diag {off['measured']:.1e} "
                  f"(<= 1e-7), diag {diag['measured']:.1e} (<= 1e-6)")
    assert ok


def test_criterion_05_completeness(reports, system, windowed_system):
    lvl = check(reports[0], "telescoping", "per_level")
    summed = check(reports[0], "telescoping", "summed")
    tele_ok = lvl["measured"] <= 1e-9 and summed["measured"] <= 1e-9
    tail = CFG.tol("tail")
    plateau = []
    for k in range(20):
        f = plateau_bumps(system.cov, system.axis0, np.random.default_rng([CFG.seed, 50, k]))
        c, _ = system.analyze(f, tail_tol=tail, warn=False)
        plateau.append(rel_err(f, system.synthesize(c)))
    sysm, win = windowed_system
    generic = []
    for k in range(20):
        f = random_bumps(sysm.cov, np.random.default_rng([CFG.seed, 51, k]), k=3, spatial_extent=2.0,
                         window=win).on(sysm.axis0)
        c, _ = sysm.analyze(f, tail_tol=tail, warn=False)
        generic.append(rel_err(f, sysm.synthesize(c)))
    rt = CFG.tol("roundtrip")
    p_ok, g_ok = max(plateau) <= rt, max(generic) <= rt
    ok = tele_ok and p_ok and g_ok
    record(5, ok, f"telescoping {max(lvl['measured'], summed['measured']):.1e} (<= 1e-9) "
                  f"{'PASS' if tele_ok else 'FAIL'}; round trip plateau inputs max {max(plateau):.1e} "
                  f"{'PASS' if p_ok else 'FAIL'}; generic windowed inputs max {max(generic):.1e} "
                  f"{'PASS' if g_ok else 'FAIL'} (<= 1e-5, 20 inputs each)")
    assert tele_ok and p_ok
    assert g_ok, f"generic band-limited round trip {max(generic):.3e} exceeds {rt}"


def test_criterion_06_covering_geometry(reports):
    n0 = check(reports[0], "covering", "n0")
    eps = check(reports[0], "covering", "epsilon")
    qr = check(reports[0], "covering", "qrule")
    alpha = CFG.alpha
    fits = {}
    for jmax, jmin in ((8, -4), (16, -8)):
        rep = validate_covering(build_covering(AlphaParams(alpha, 1.0, jmin, jmax)))
        fits[(jmax, jmin)] = (rep.fit_high, rep.fit_low)
    geom = {k: abs(h - 2 * alpha) <= 0.1 and abs(lo - 2 * (2 - alpha)) <= 0.1 for k, (h, lo) in fits.items()}
    geom_ok = geom[(16, -8)]
    q_ok = all(math.isfinite(x) and x > 0 for x in qr["measured"])
    eps_ok = eps["passed"] and eps["measured"] > 0
    n0_ok = n0["measured"] <= 9
    ok = n0_ok and geom_ok and q_ok and eps_ok
    fit_txt = "; ".join(f"j in [{jmin},{jmax}]: {h:.3f}/{lo:.3f} {'PASS' if geom[(jmax, jmin)] else 'FAIL'}"
                        for (jmax, jmin), (h, lo) in fits.items())
    record(6, ok, f"n0 = {n0['measured']} (<= 9) {'PASS' if n0_ok else 'FAIL'}; geom fits vs "
                  f"{2 * alpha:.1f}/{2 * (2 - alpha):.1f} {fit_txt}; Q-rule ratio range "
                  f"[{qr['measured'][0]:.3f}, {qr['measured'][1]:.3f}]; eps c = {eps['measured']:.2e}")
    assert geom_ok and q_ok and eps_ok
    assert n0_ok, f"closed-overlap count {n0['measured']} exceeds 9"


def test_criterion_07_bapu(reports):
    c = check(reports[0], "partition", "bapu_sum")
    ok = c["measured"] <= 1e-12
    record(7, ok, f"max |sum phi_Q - 1| = {c['measured']:.1e} (<= 1e-12) on 1e5 covered points")
    assert ok


def test_criterion_08_norms(windowed_system):
    sysm, win = windowed_system
    cov = sysm.cov
    hw = HybridWeight(CFG.alpha, CFG.ramp())
    rng = np.random.default_rng([CFG.seed, 8])
    worst = 0.0
    for Q in (cov.rects[3], cov.annuli[3][5], cov.annuli[4][20]):
        for p, q in ((2, 2), (1, 3), (3, 1.5), (2, math.inf)):
            npar = NormParams(0.5, p, q)
            n = (int(rng.integers(6)), int(rng.integers(6)))
            z = complex(rng.standard_normal(), rng.standard_normal())
            got = sequence_norm(CoeffMap.from_entries([((*Q.id, *n), z)]), cov, hw, npar,
                                method="scanline").value
            worst = max(worst, abs(got / single_coefficient_norm(z, Q, hw, npar) - 1))
    entries = [((*cov.rects[i].id, int(rng.integers(5)), int(rng.integers(5))),
                complex(rng.standard_normal(), rng.standard_normal())) for i in rng.choice(96, 30, replace=False)]
    npar = NormParams(0.5, 1.5, 3.0)
    base = sequence_norm(CoeffMap.from_entries(entries), cov, hw, npar).value
    flips = [lambda v: -v, lambda v: 1j * v, lambda v: -1j * v, np.conj]
    invariant = all(
        sequence_norm(CoeffMap.from_entries([(k, fl(v) if i % 2 else v) for i, (k, v) in enumerate(entries)]),
                      cov, hw, npar).value == base for fl in flips)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eq = equivalence_experiment(standard_family(cov, sysm.axis0, win), sysm, hw, NormParams(0, 2, 2))
    bound = BOUNDS["equivalence_spread_s0_p2_q2"]["bound"]
    ok = worst <= 1e-4 and invariant and eq["spread"] <= bound
    record(8, ok, f"single coefficient rel dev {worst:.1e} (<= 1e-4); sign/phase bit-invariant {invariant}; "
                  f"equivalence spread {eq['spread']:.6f} (<= frozen {bound}) over 50 functions")
    assert ok


def test_criterion_09_m_term(system):
    rng = np.random.default_rng([CFG.seed, 9])
    cov = system.cov
    entries, seen = [], set()
    while len(entries) < 300:
        Q = cov.rects[int(rng.integers(len(cov.rects)))]
        n = (int(rng.integers(6)), int(rng.integers(6)))
        if (Q.id, n) not in seen:
            seen.add((Q.id, n))
            mag = (len(entries) + 1) ** -1.0
            entries.append(((*Q.id, *n), mag * np.exp(2j * math.pi * rng.random())))
    f = system.synthesize(CoeffMap.from_entries(entries))
    res = error_curve(f, system, MTermPlan((1, 10, 50, 150, 299)), tail_tol=1e-13)
    dev = max(abs(e - t) for (_, e), (_, t) in zip(res["curve"], res["tail"]))
    k = 40
    sparse = system.synthesize(CoeffMap.from_entries(entries[:k]))
    rec = error_curve(sparse, system, MTermPlan((k,)), tail_tol=1e-13)["curve"][0][1]
    ok = dev <= 1e-8 and rec <= 1e-10
    record(9, ok, f"|error_curve - Parseval tail| = {dev:.1e} (<= 1e-8); {k}-sparse recovery error at m={k}: "
                  f"{rec:.1e}")
    assert ok


def test_criterion_10_maxbound(reports):
    spread = check(reports[0], "maxbound", "maxbound_spread")
    frozen = check(reports[0], "maxbound", "maxbound_frozen")
    ok = spread["measured"] <= 10 and frozen["measured"] <= BOUNDS["maxbound_ratio"]["bound"]
    record(10, ok, f"3 rects x 20 sets at r = 1/2: spread {spread['measured']:.2f} (<= 10), max C "
                   f"{frozen['measured']:.1f} (<= frozen {BOUNDS['maxbound_ratio']['bound']})")
    assert ok


def test_criterion_11_determinism(reports):
    _, a, b = reports
    ok = a == b
    record(11, ok, f"two verify runs with seed {CFG.seed}: {len(a)} byte reports identical = {ok}")
    assert ok
