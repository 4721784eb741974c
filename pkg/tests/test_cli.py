import csv
import json

import numpy as np
import pytest

from alphabrush import formats
from alphabrush.cli import main
from alphabrush.covering import covering_from_json
from alphabrush.grid import axis_for_covering
from alphabrush.signals import plateau_bumps

SMALL = ["--alpha", "0.5", "--jmin", "-1", "--jmax", "3"]


@pytest.fixture
def cov_file(tmp_path):
    p = tmp_path / "cov.json"
    assert main(["covering", "build", *SMALL, "-o", str(p)]) == 0
    return p


@pytest.fixture
def spectrum_file(tmp_path, cov_file):
    cov = covering_from_json(cov_file.read_text())
    ax = axis_for_covering(cov, spatial_extent=2.0, n_res=18, q_collar=12)
    p = tmp_path / "f.npz"
    formats.save_spectrum(p, plateau_bumps(cov, ax, np.random.default_rng(2), rects=cov.rects[::4]))
    return p


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_covering_build_and_validate(tmp_path, cov_file, capsys):
    assert covering_from_json(cov_file.read_text()).params.j_max == 3
    rc = main(["covering", "validate", str(cov_file), "-o", str(tmp_path / "rep.json")])
    rep = json.loads((tmp_path / "rep.json").read_text())
    assert rc in (0, 1) and rc == (0 if rep["passed"] else 1)
    assert rep["flags"]["epsilon"] and rep["flags"]["gluing"]


def test_covering_validate_literal_rule_fails(tmp_path):
    p = tmp_path / "lit.json"
    assert main(["covering", "build", *SMALL, "--eps-rule", "literal", "-o", str(p)]) == 0
    assert main(["covering", "validate", str(p), "-o", str(tmp_path / "r.json")]) == 1


def test_corrupt_covering_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{ not json")
    assert main(["covering", "validate", str(p)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["covering", "validate", str(tmp_path / "missing.json")]) == 2


def test_bells_render(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bells", "render", "--interval", "1,3,0.2,0.1", "--points", "51", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 52
    vals = np.array([[float(x) for x in r] for r in rows[1:]])
    assert vals[0, 1] == 0.0 and np.max(vals[:, 1]) == 1.0
    assert main(["bells", "render", "--interval", "3,1,0.2,0.1"]) == 2


def test_analyze_synthesize_round_trip(tmp_path, cov_file, spectrum_file):
    c = tmp_path / "c.bin"
    assert main(["analyze", "--covering", str(cov_file), "--input", str(spectrum_file), "--tail-tol", "1e-14",
                 "-o", str(c), "--report", str(tmp_path / "a.json")]) == 0
    rep = json.loads((tmp_path / "a.json").read_text())
    assert rep["coefficients"] > 0
    g = tmp_path / "g.npz"
    assert main(["synthesize", "--covering", str(cov_file), "--coeffs", str(c), "--like", str(spectrum_file),
                 "-o", str(g)]) == 0
    f0 = formats.load_spectrum(spectrum_file)
    f1 = formats.load_spectrum(g)
    assert np.linalg.norm(f1.values - f0.values) / np.linalg.norm(f0.values) < 1e-5


def test_synthesize_unknown_rect(tmp_path, cov_file, spectrum_file):
    from alphabrush.brushlet2d import CoeffMap

    c = tmp_path / "c.bin"
    formats.write_coeffs2d(CoeffMap.from_entries([((9, "L", 0, 0, 0), 1.0)]), c)
    assert main(["synthesize", "--covering", str(cov_file), "--coeffs", str(c), "--like", str(spectrum_file),
                 "-o", str(tmp_path / "g.npz")]) == 2


def test_gram_seams(tmp_path, cov_file, spectrum_file):
    out = tmp_path / "g.json"
    assert main(["gram", "--covering", str(cov_file), "--subset", "seams:40", "--like", str(spectrum_file),
                 "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"]


def test_norms(tmp_path, cov_file, spectrum_file):
    c = tmp_path / "c.bin"
    main(["analyze", "--covering", str(cov_file), "--input", str(spectrum_file), "-o", str(c)])
    vals = {}
    for kind, src in (("seq", ["--coeffs", str(c)]), ("sfunc", ["--input", str(spectrum_file)]),
                      ("f", ["--input", str(spectrum_file)])):
        out = tmp_path / f"{kind}.json"
        assert main(["norm", "--kind", kind, "--covering", str(cov_file), *src, "-o", str(out)]) == 0
        d = json.loads(out.read_text())
        assert set(d) == {"value", "truncation_mass", "warnings"}
        vals[kind] = d["value"]
    assert vals["seq"] == pytest.approx(vals["sfunc"], rel=1e-6)
    assert vals["f"] > 0
    assert main(["norm", "--kind", "seq", "--covering", str(cov_file)]) == 2


def test_compress(tmp_path, cov_file, spectrum_file):
    out = tmp_path / "e.csv"
    assert main(["compress", "--covering", str(cov_file), "--input", str(spectrum_file), "--m", "5,20,80",
                 "--report", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["m", "rel_error", "parseval_tail"]
    errs = [float(r[1]) for r in rows[1:]]
    assert errs == sorted(errs, reverse=True)
    assert main(["compress", "--covering", str(cov_file), "--input", str(spectrum_file), "--m", "5,3"]) == 2


def test_maximal_commands(tmp_path):
    img = tmp_path / "u.raw"
    np.random.default_rng(0).standard_normal((16, 16)).tofile(img)
    for op in ("hl", "peetre"):
        out = tmp_path / f"{op}.csv"
        assert main(["maximal", op, "--input", str(img), "--out", str(out)]) == 0
        assert len(read_csv(out)) == 1 + 256
    out = tmp_path / "mb.csv"
    assert main(["maximal", "maxbound", *SMALL, "--rect", "3,R,0", "--sets", "2", "--block", "3",
                 "--out", str(out)]) == 0
    assert len(read_csv(out)) == 3
    assert main(["maximal", "maxbound", *SMALL, "--rect", "7,Q,0"]) == 2
    assert main(["maximal", "hl"]) == 2


def test_verify_suites(tmp_path, capsys):
    rep = tmp_path / "v.json"
    assert main(["verify", "bells", "partition", "--report", str(rep)]) == 0
    d = json.loads(rep.read_text())
    assert set(d["suites"]) == {"bells", "partition"} and d["passed"]
    assert (tmp_path / "resolved_config.toml").exists()
    assert main(["verify", "nonsense", "--report", str(rep)]) == 2


def test_verify_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", "gluing", "--seed", "3", "--report", str(a)])
    main(["verify", "gluing", "--seed", "3", "--report", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_demo_outputs(tmp_path):
    out = tmp_path / "demo"
    assert main(["demo", "--out-dir", str(out), "--seed", "1"]) == 0
    for name in ("coeffs.bin", "reconstruction.npz", "error_curve.csv", "tiling.csv", "metrics.json",
                 "resolved_config.toml"):
        assert (out / name).exists(), name
    m = json.loads((out / "metrics.json").read_text())
    assert m["roundtrip_rel_error"] <= 1e-5
    tiles = read_csv(out / "tiling.csv")
    assert len(tiles) == 1 + 96
    curve = read_csv(out / "error_curve.csv")
    for row in curve[1:]:
        # the two differ only by the round-trip residual
        assert abs(float(row[1]) - float(row[2])) <= m["roundtrip_rel_error"] * 1.01
    out2 = tmp_path / "demo2"
    main(["demo", "--out-dir", str(out2), "--seed", "1"])
    assert (out / "coeffs.bin").read_bytes() == (out2 / "coeffs.bin").read_bytes()


def test_demo_image_input(tmp_path, capsys):
    img = tmp_path / "img.pgm"
    x = np.linspace(-1, 1, 24)
    a = (255 * np.exp(-8 * (x[:, None] ** 2 + x[None, :] ** 2))).astype(np.uint8)
    img.write_bytes(b"P5\n24 24\n255\n" + a.tobytes())
    assert main(["demo", "--input", str(img), "--out-dir", str(tmp_path / "d")]) == 0
    m = json.loads((tmp_path / "d" / "metrics.json").read_text())
    assert m["input"] == str(img) and "out_of_band_energy" in m
