"""``alphabrush`` command line.

Exit codes: 0 success, 1 a check failed, 2 unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import formats
from .approx import MTermPlan, error_curve
from .bells import Bell, Ramp, central_bell_time
from .brushlet2d import BrushletIndex2D, BrushletSystem
from .config import RunConfig, load_config, seed_from_env, write_resolved
from .covering import CoveringError, Interval, covering_from_json, covering_to_json, validate_covering
from .grid import MisalignedGridError, SpectrumGrid
from .maximal import check_maxbound, hl_maximal, peetre_maximal, symmetric_field
from .spaces import HybridWeight, NormParams, mod_norm, sequence_norm, sfunc_norm, tl_norm
from .verify import SUITES, report_json, run_verify, seam_subset


class InputError(Exception):
    """Bad user input; maps to exit status 2."""


# ------------------------------------------------------------------ helpers


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    over = {}
    for key, attr in (("alpha", "alpha"), ("r1", "r1"), ("j_min", "jmin"), ("j_max", "jmax"),
                      ("eps_rule", "eps_rule"), ("ramp_order", "ramp_order"), ("seed", "seed"),
                      ("output_dir", "out_dir")):
        v = getattr(args, attr, None)
        if v is not None:
            over[key] = v
    cfg = cfg.with_overrides(**over)
    if getattr(args, "seed", None) is None:
        cfg = cfg.with_overrides(seed=seed_from_env(cfg.seed))
    return cfg


def _load_covering(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read covering {path}: {exc}") from exc
    return covering_from_json(text)


def _system_for(cov, spec: SpectrumGrid, ramp: Ramp) -> BrushletSystem:
    return BrushletSystem(cov, spec.axis0, spec.axis1, ramp=ramp)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma separated numbers, got {text!r}") from exc


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path, header, rows):
    fh = open(path, "w", newline="") if path and path != "-" else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    finally:
        if fh is not sys.stdout:
            fh.close()


# ----------------------------------------------------------------- commands


def cmd_covering(args) -> int:
    if args.action == "build":
        cfg = _config(args)
        cov = cfg.covering()
        text = covering_to_json(cov)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    cov = _load_covering(args.file)
    rep = validate_covering(cov)
    _emit(rep.to_dict(), args.output)
    return 0 if rep.passed else 1


def cmd_bells(args) -> int:
    vals = _floats(args.interval)
    if len(vals) != 4:
        raise InputError("--interval needs lo,hi,epslo,epshi")
    lo, hi, e0, e1 = vals
    if not (hi > lo and e0 > 0 and e1 > 0 and e0 + e1 <= hi - lo):
        raise InputError("need lo < hi, positive cutoffs and epslo + epshi <= hi - lo")
    iv = Interval(lo, hi, e0, e1)
    bell = Bell(iv, Ramp(args.ramp_order))
    xi = np.linspace(lo - e0 - 0.05 * iv.length, hi + e1 + 0.05 * iv.length, args.points)
    cols = [xi, bell(xi)]
    header = ["xi", "b"]
    if args.time:
        x = np.linspace(0.0, args.x_max, args.points)
        cols += [x, np.abs(central_bell_time(bell, x))]
        header += ["x", "abs_g"]
    _write_csv(args.out, header, zip(*cols))
    return 0


def cmd_analyze(args) -> int:
    cov = _load_covering(args.covering)
    spec = formats.load_spectrum(args.input, cov)
    sysm = _system_for(cov, spec, Ramp(args.ramp_order))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        coeffs, rep = sysm.analyze(spec, tail_tol=args.tail_tol)
    formats.write_coeffs2d(coeffs, args.output)
    _emit({
        "coefficients": coeffs.nnz(),
        "max_deficit": rep.max_deficit,
        "uncovered_fraction": rep.uncovered_fraction,
        "unmet_rects": [list(r) for r in rep.unmet],
        "warnings": [str(w.message) for w in caught],
    }, args.report)
    return 0


def _axis_source(args, cov, cfg):
    if args.like:
        return formats.load_spectrum(args.like, cov)
    ax = cfg.grid.axis(cov)
    return SpectrumGrid.zeros(ax)


def cmd_synthesize(args) -> int:
    cfg = _config(args)
    cov = _load_covering(args.covering)
    coeffs = formats.read_coeffs2d(args.coeffs)
    ref = _axis_source(args, cov, cfg)
    sysm = _system_for(cov, ref, cfg.ramp())
    for rid in coeffs.rect_ids():
        try:
            cov.rect(rid)
        except KeyError as exc:
            raise InputError(f"coefficient file references unknown rect {rid}") from exc
    out = sysm.synthesize(coeffs)
    formats.save_spectrum(args.output, out)
    return 0


def _parse_subset(spec: str, sysm: BrushletSystem) -> list[BrushletIndex2D]:
    if spec.startswith("seams"):
        _, _, n = spec.partition(":")
        return seam_subset(sysm, target=int(n) if n else 200)
    try:
        items = json.loads(Path(spec).read_text())
        return [BrushletIndex2D(sysm.cov.rect((int(j), str(s), int(na))), (int(n1), int(n2)))
                for j, s, na, n1, n2 in items]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad --subset {spec!r}: {exc}") from exc


def cmd_gram(args) -> int:
    cfg = _config(args)
    cov = _load_covering(args.covering)
    ref = _axis_source(args, cov, cfg)
    sysm = _system_for(cov, ref, cfg.ramp())
    sub = _parse_subset(args.subset, sysm)
    G = sysm.gram(sub)
    off = np.abs(G - np.diag(np.diag(G)))
    res = {
        "size": len(sub),
        "max_offdiag": float(off.max()) if G.size else 0.0,
        "max_diag_error": float(np.abs(np.diag(G) - 1).max()) if G.size else 0.0,
    }
    res["passed"] = res["max_offdiag"] <= cfg.tol("gram_offdiag") and res["max_diag_error"] <= cfg.tol("gram_diag")
    _emit(res, args.output)
    return 0 if res["passed"] else 1


def cmd_norm(args) -> int:
    cfg = _config(args)
    cov = _load_covering(args.covering)
    hw = HybridWeight(cov.params.alpha, cfg.ramp())
    npar = NormParams(args.s, args.p, math.inf if args.q in ("inf", "infinity") else float(args.q))
    if args.kind == "seq":
        if not args.coeffs:
            raise InputError("--kind seq needs --coeffs")
        res = sequence_norm(formats.read_coeffs2d(args.coeffs), cov, hw, npar)
    else:
        if not args.input:
            raise InputError(f"--kind {args.kind} needs --input")
        spec = formats.load_spectrum(args.input, cov)
        sysm = _system_for(cov, spec, cfg.ramp())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if args.kind == "sfunc":
                res = sfunc_norm(spec, sysm, hw, npar)
            else:
                fn = tl_norm if args.kind == "f" else mod_norm
                res = fn(spec, sysm, hw, npar, spatial_extent=args.spatial_extent)
    d = res.to_dict()
    _emit({"value": d["value"], "truncation_mass": d["truncation_mass"], "warnings": d["warnings"]}, args.output)
    return 0


def cmd_compress(args) -> int:
    cfg = _config(args)
    cov = _load_covering(args.covering)
    spec = formats.load_spectrum(args.input, cov)
    sysm = _system_for(cov, spec, cfg.ramp())
    plan = MTermPlan(tuple(int(m) for m in _floats(args.m)), args.mode, args.s, cov.params.alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = error_curve(spec, sysm, plan, tail_tol=args.tail_tol)
    rows = [(m, e, t) for (m, e), (_, t) in zip(res["curve"], res["tail"])]
    _write_csv(args.report, ["m", "rel_error", "parseval_tail"], rows)
    return 0


def cmd_maximal(args) -> int:
    if args.op == "maxbound":
        cfg = _config(args)
        cov = _load_covering(args.covering) if args.covering else cfg.covering()
        rid = args.rect.split(",")
        try:
            Q = cov.rect((int(rid[0]), rid[1], int(rid[2])))
        except (KeyError, IndexError, ValueError) as exc:
            raise InputError(f"bad --rect {args.rect!r}") from exc
        rng = np.random.default_rng(cfg.seed)
        rows = []
        for k in range(args.sets):
            S = rng.standard_normal((args.block, args.block)) + 1j * rng.standard_normal((args.block, args.block))
            r = check_maxbound(Q, S, r=args.r or 0.5)
            rows.append((k, r["ratio"], r["lhs_max"], r["rhs_min"]))
        _write_csv(args.out, ["set", "ratio", "lhs_max", "rhs_min"], rows)
        return 0
    if not args.input:
        raise InputError(f"maximal {args.op} needs --input")
    img = formats.read_image(args.input)
    if img.shape[0] != img.shape[1]:
        raise InputError("maximal functions need a square grid")
    fld = symmetric_field(img, args.step)
    out = hl_maximal(fld, args.r or 1.0) if args.op == "hl" else peetre_maximal(fld, args.a, args.R)
    x = out.coords
    rows = ((x[i], x[j], out.values[i, j]) for i in range(out.n) for j in range(out.n))
    _write_csv(args.out, ["x1", "x2", "value"], rows)
    return 0


def cmd_verify(args) -> int:
    cfg = _config(args)
    cov = None
    if args.covering:
        cov = _load_covering(args.covering)
    rep = run_verify(cfg, args.suites or None, cov)
    text = report_json(rep)
    out = Path(args.report) if args.report else Path(cfg.output_dir) / "verify_report.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    write_resolved(cfg, out.parent)
    for name, s in rep["suites"].items():
        bad = [c["name"] for c in s["checks"] if not c["passed"]]
        print(f"{name:12s} {'PASS' if s['passed'] else 'FAIL'}" + (f"  ({', '.join(bad)})" if bad else ""))
    return 0 if rep["passed"] else 1


def _image_spectrum(img: np.ndarray, axis, step: float) -> np.ndarray:
    """Unitary 2-D Fourier transform of the sampled image, on ``axis``."""
    n = img.shape[0]
    x = step * (np.arange(n) - 0.5 * (n - 1))
    E = np.exp(-1j * np.outer(axis.nodes, x)) * (step / math.sqrt(2 * math.pi))
    vals = E @ img @ E.T
    nyq = math.pi / step
    inside = np.abs(axis.nodes) <= nyq
    vals[~inside, :] = 0
    vals[:, ~inside] = 0
    return vals


def cmd_demo(args) -> int:
    from .signals import plateau_bumps

    cfg = _config(args)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cov = cfg.covering()
    axis = cfg.grid.axis(cov)
    sysm = BrushletSystem(cov, axis, ramp=cfg.ramp())
    metrics: dict = {"seed": cfg.seed, "grid_nodes": len(axis), "warnings": []}
    if args.input:
        img = formats.read_image(args.input)
        if img.shape[0] != img.shape[1]:
            raise InputError("demo input must be a square grid")
        outer = cov.outer_square
        step = args.pixel or math.pi / (outer.hi + outer.eps_hi)
        f = SpectrumGrid(axis, axis, _image_spectrum(img, axis, step))
        metrics["input"] = str(args.input)
        metrics["pixel"] = step
        sample_energy = float(np.sum(img**2) * step * step)
    else:
        f = plateau_bumps(cov, axis, np.random.default_rng(cfg.seed), spatial_extent=cfg.grid.spatial_extent)
        metrics["input"] = "synthetic"
        sample_energy = f.norm() ** 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        coeffs, rep = sysm.analyze(f, tail_tol=cfg.tol("tail"))
    captured = coeffs.energy()
    out_band = max(0.0, 1.0 - captured / sample_energy) if sample_energy > 0 else 0.0
    metrics["out_of_band_energy"] = out_band
    if out_band > 1e-6:
        msg = f"input is not band-limited to the covered annulus: {out_band:.3e} of its energy lies outside"
        metrics["warnings"].append(msg)
        print("warning: " + msg, file=sys.stderr)
    g = sysm.synthesize(coeffs)
    proj_err = g.like(g.values - f.values).norm() / f.norm() if f.norm() > 0 else 0.0
    metrics["roundtrip_rel_error"] = proj_err
    metrics["coefficients"] = coeffs.nnz()
    total = coeffs.nnz()
    m_values = sorted({m for m in (1, 10, 100, 1000, 10000, total) if 0 < m <= total})
    plan = MTermPlan(tuple(m_values))
    curve = error_curve(f, sysm, plan, coeffs=coeffs)
    metrics["rate"] = curve["rate"]
    formats.write_coeffs2d(coeffs, out_dir / "coeffs.bin")
    formats.save_spectrum(out_dir / "reconstruction.npz", g)
    _write_csv(out_dir / "error_curve.csv", ["m", "rel_error", "parseval_tail"],
               [(m, e, t) for (m, e), (_, t) in zip(curve["curve"], curve["tail"])])
    _write_csv(out_dir / "tiling.csv", ["xi1", "xi2", "j", "side", "n_along", "ix_lo", "ix_hi", "iy_lo", "iy_hi"],
               [(Q.xi[0], Q.xi[1], Q.level, Q.side, Q.n_along, Q.ix.lo, Q.ix.hi, Q.iy.lo, Q.iy.hi)
                for Q in cov.rects])
    (out_dir / "metrics.json").write_text(json.dumps(metrics, indent=1, sort_keys=True) + "\n")
    write_resolved(cfg, out_dir)
    print(f"round trip {proj_err:.3e}, {total} coefficients, outputs in {out_dir}")
    return 0


# ------------------------------------------------------------------- parser


def _common(p, covering_opts=False):
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--ramp-order", dest="ramp_order", type=int)
    if covering_opts:
        p.add_argument("--alpha", type=float)
        p.add_argument("--r1", type=float)
        p.add_argument("--jmin", type=int)
        p.add_argument("--jmax", type=int)
        p.add_argument("--eps-rule", dest="eps_rule", choices=["hybrid", "literal"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="alphabrush", description="Brushlet bases on alpha-coverings")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("covering", help="build or validate a covering")
    csub = p.add_subparsers(dest="action", required=True)
    b = csub.add_parser("build")
    _common(b, covering_opts=True)
    b.add_argument("-o", "--output")
    v = csub.add_parser("validate")
    v.add_argument("file")
    v.add_argument("-o", "--output")
    p.set_defaults(func=cmd_covering)

    p = sub.add_parser("bells", help="sample a bell function")
    bsub = p.add_subparsers(dest="action", required=True)
    r = bsub.add_parser("render")
    r.add_argument("--interval", required=True, help="lo,hi,epslo,epshi")
    r.add_argument("--out", default="-")
    r.add_argument("--points", type=int, default=1001)
    r.add_argument("--time", action="store_true", help="add (x, |g_I(x)|) columns")
    r.add_argument("--x-max", dest="x_max", type=float, default=50.0)
    r.add_argument("--ramp-order", dest="ramp_order", type=int, default=3)
    p.set_defaults(func=cmd_bells)

    p = sub.add_parser("analyze", help="spectrum -> coefficient file")
    p.add_argument("--covering", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--tail-tol", dest="tail_tol", type=float, default=1e-8)
    p.add_argument("--ramp-order", dest="ramp_order", type=int, default=3)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="coefficient file -> spectrum")
    _common(p)
    p.add_argument("--covering", required=True)
    p.add_argument("--coeffs", required=True)
    p.add_argument("--like", help="spectrum archive whose axes are reused")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("gram", help="Gram matrix of a brushlet subset")
    _common(p)
    p.add_argument("--covering", required=True)
    p.add_argument("--subset", default="seams", help="'seams[:N]' or JSON list of [j, side, n_along, n1, n2]")
    p.add_argument("--like")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("norm", help="space and sequence norms")
    _common(p)
    p.add_argument("--kind", choices=["f", "m", "seq", "sfunc"], required=True)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", default="2")
    p.add_argument("--covering", required=True)
    p.add_argument("--coeffs")
    p.add_argument("--input")
    p.add_argument("--spatial-extent", dest="spatial_extent", type=float, default=16.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("compress", help="m-term error curve")
    _common(p)
    p.add_argument("--covering", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--m", required=True, help="comma separated, increasing")
    p.add_argument("--mode", choices=["l2", "fnorm"], default="l2")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--tail-tol", dest="tail_tol", type=float, default=1e-10)
    p.add_argument("--report", default="-")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("maximal", help="maximal functions on sampled grids")
    _common(p, covering_opts=True)
    p.add_argument("op", choices=["hl", "peetre", "maxbound"])
    p.add_argument("--input", help="PGM or raw float64 square grid")
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--r", type=float, help="M_r exponent (default 1 for hl, 1/2 for maxbound)")
    p.add_argument("--a", type=float, default=3.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--covering")
    p.add_argument("--rect", default="3,R,0", help="j,side,n_along")
    p.add_argument("--sets", type=int, default=20)
    p.add_argument("--block", type=int, default=6)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_maximal)

    p = sub.add_parser("verify", help="run invariant suites")
    _common(p, covering_opts=True)
    p.add_argument("suites", nargs="*", metavar="suite", help="any of: " + ", ".join(SUITES))
    p.add_argument("--covering", help="covering JSON to verify instead of building one")
    p.add_argument("--report")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", help="analyze, threshold and synthesize end to end")
    _common(p, covering_opts=True)
    p.add_argument("--input", help="PGM or raw float64 square image")
    p.add_argument("--pixel", type=float, help="pixel size (default: Nyquist at the outer square)")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except (InputError, CoveringError, formats.FormatError, MisalignedGridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
