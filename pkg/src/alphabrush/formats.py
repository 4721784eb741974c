"""Binary/CSV coefficient files and spectrum archives."""

from __future__ import annotations

import csv
import math
import io
import struct
from pathlib import Path

import numpy as np

from .brushlet2d import CoeffMap
from .covering import SIDE_CODE, SIDES

__all__ = [
    "FormatError",
    "write_coeffs2d",
    "read_coeffs2d",
    "write_coeffs1d",
    "read_coeffs1d",
    "write_coeffs1d_csv",
    "read_coeffs1d_csv",
    "save_spectrum",
    "load_spectrum",
    "read_pgm",
    "read_raw_f64",
    "read_image",
]

MAGIC2D = b"ABRUSH2D"
MAGIC1D = b"ABRUSH1D"
VERSION = 1
_HEADER = struct.Struct("<8sII")
_REC2D = np.dtype([("j", "<i4"), ("side", "u1"), ("n_along", "<i4"), ("n1", "<u4"), ("n2", "<u4"),
                   ("re", "<f8"), ("im", "<f8")])
_REC1D = np.dtype([("j", "<f8"), ("index", "<f8"), ("n", "<f8"), ("re", "<f8"), ("im", "<f8")])


class FormatError(ValueError):
    pass


def _coeffs_to_records(coeffs: CoeffMap) -> np.ndarray:
    keys, vals = coeffs.arrays()
    rec = np.zeros(len(keys), dtype=_REC2D)
    if keys:
        k = np.array([(j, SIDE_CODE[s], na, n1, n2) for j, s, na, n1, n2 in keys], dtype=np.int64)
        rec["j"], rec["side"], rec["n_along"], rec["n1"], rec["n2"] = k.T
        rec["re"], rec["im"] = vals.real, vals.imag
        order = np.lexsort((rec["n2"], rec["n1"], rec["n_along"], rec["side"], rec["j"]))
        rec = rec[order]
    return rec


def write_coeffs2d(coeffs: CoeffMap, path) -> None:
    rec = _coeffs_to_records(coeffs)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC2D, VERSION, rec.size))
        fh.write(rec.tobytes())


def read_coeffs2d(path) -> CoeffMap:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError("file too short for an ABRUSH2D header")
    magic, version, count = _HEADER.unpack_from(data)
    if magic != MAGIC2D:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    body = data[_HEADER.size:]
    if len(body) != count * _REC2D.itemsize:
        raise FormatError("record count does not match file size")
    rec = np.frombuffer(body, dtype=_REC2D)
    if rec.size and rec["side"].max() >= len(SIDES):
        raise FormatError("invalid side code")
    return CoeffMap.from_entries(
        ((int(r["j"]), SIDES[r["side"]], int(r["n_along"]), int(r["n1"]), int(r["n2"])), complex(r["re"], r["im"]))
        for r in rec)


def _rows1d(coeffs: dict) -> list[tuple[int, int, int, complex]]:
    """``coeffs`` maps (j, interval_index) -> 1-D array over n."""
    rows = []
    for (j, idx) in sorted(coeffs):
        for n, v in enumerate(np.asarray(coeffs[(j, idx)], dtype=complex)):
            rows.append((int(j), int(idx), n, complex(v)))
    return rows


def write_coeffs1d(coeffs: dict, path) -> None:
    rows = _rows1d(coeffs)
    rec = np.zeros(len(rows), dtype=_REC1D)
    for i, (j, idx, n, v) in enumerate(rows):
        rec[i] = (j, idx, n, v.real, v.imag)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC1D, VERSION, rec.size))
        fh.write(rec.tobytes())


def _collect1d(items) -> dict:
    acc: dict = {}
    for j, idx, n, v in items:
        acc.setdefault((j, idx), {})[n] = v
    out = {}
    for key, d in acc.items():
        arr = np.zeros(max(d) + 1, dtype=complex)
        for n, v in d.items():
            arr[n] = v
        out[key] = arr
    return out


def read_coeffs1d(path) -> dict:
    data = Path(path).read_bytes()
    magic, version, count = _HEADER.unpack_from(data)
    if magic != MAGIC1D or version != VERSION:
        raise FormatError("not an ABRUSH1D v1 file")
    rec = np.frombuffer(data[_HEADER.size:], dtype=_REC1D)
    if rec.size != count:
        raise FormatError("record count does not match file size")
    return _collect1d((int(r["j"]), int(r["index"]), int(r["n"]), complex(r["re"], r["im"])) for r in rec)


def write_coeffs1d_csv(coeffs: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "interval_index", "n", "re", "im"])
        for j, idx, n, v in _rows1d(coeffs):
            w.writerow([j, idx, n, repr(v.real), repr(v.imag)])


def read_coeffs1d_csv(path) -> dict:
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        return _collect1d((int(row["j"]), int(row["interval_index"]), int(row["n"]),
                           complex(float(row["re"]), float(row["im"]))) for row in r)


def save_spectrum(path, grid) -> None:
    """``.npz`` with nodes0, weights0, nodes1, weights1 and complex values.

    The per-node resolution arrays ``nu0``/``nu1`` and the axis kinds are
    stored too, so :func:`load_spectrum` can rebuild the exact axes.
    """
    np.savez(path, nodes0=grid.axis0.nodes, weights0=grid.axis0.weights,
             nodes1=grid.axis1.nodes, weights1=grid.axis1.weights, values=grid.values,
             nu0=grid.axis0.nu, nu1=grid.axis1.nu, kind=np.array([grid.axis0.kind, grid.axis1.kind]))


def _axis(nodes, weights, nu, kind, knots):
    from .grid import FrequencyAxis

    if nu is None:
        # resolution implied by the local node spacing
        gap = np.diff(nodes)
        nu = np.pi / np.maximum(np.concatenate([gap[:1], gap]), np.concatenate([gap, gap[-1:]]))
    ax = FrequencyAxis(nodes, weights, nu, {float(r): float(e) for r, e in knots}, kind)
    ax.validate_reflections()
    return ax


def load_spectrum(path, cov=None):
    """SpectrumGrid from :func:`save_spectrum` (or any archive with the five
    required arrays).  With a covering, its knots are registered on the axes
    and checked for reflection alignment."""
    from .grid import SpectrumGrid

    try:
        with np.load(path, allow_pickle=False) as z:
            d = {k: z[k] for k in z.files}
        need = ("nodes0", "weights0", "nodes1", "weights1", "values")
        missing = [k for k in need if k not in d]
        if missing:
            raise FormatError(f"spectrum archive lacks {missing}")
        kinds = [str(k) for k in d.get("kind", np.array(["composite", "composite"]))]
        knots = cov.axis_knots() if cov is not None else ()
        a0 = _axis(d["nodes0"], d["weights0"], d.get("nu0"), kinds[0], knots)
        same = np.array_equal(d["nodes0"], d["nodes1"]) and np.array_equal(d["weights0"], d["weights1"])
        a1 = a0 if same else _axis(d["nodes1"], d["weights1"], d.get("nu1"), kinds[1], knots)
        return SpectrumGrid(a0, a1, np.asarray(d["values"], dtype=complex))
    except FormatError:
        raise
    except (KeyError, ValueError, OSError, EOFError) as exc:
        raise FormatError(f"cannot read spectrum archive {path}: {exc}") from exc


def coeffs_bytes(coeffs: CoeffMap) -> bytes:
    buf = io.BytesIO()
    rec = _coeffs_to_records(coeffs)
    buf.write(_HEADER.pack(MAGIC2D, VERSION, rec.size))
    buf.write(rec.tobytes())
    return buf.getvalue()


def read_pgm(path) -> np.ndarray:
    """Greyscale PGM (P2 ascii or P5 binary, 8 or 16 bit) as float64 in [0, 1]."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(data) and not data[end : end + 1].isspace():
            end += 1
        if end == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[pos:end])
        pos = end
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == b"P5":
        dt = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = np.frombuffer(data[pos + 1 : pos + 1 + w * h * dt.itemsize], dtype=dt)
    elif magic == b"P2":
        raw = np.array(data[pos:].split()[: w * h], dtype=float)
    else:
        raise FormatError(f"unsupported PGM magic {magic!r}")
    if raw.size != w * h:
        raise FormatError("PGM pixel data is truncated")
    return raw.reshape(h, w).astype(float) / maxval


def read_raw_f64(path) -> np.ndarray:
    """Square little-endian float64 grid without header."""
    a = np.fromfile(path, dtype="<f8")
    n = int(round(math.sqrt(a.size)))
    if n * n != a.size or n == 0:
        raise FormatError(f"{a.size} samples do not form a square grid")
    return a.reshape(n, n)


def read_image(path) -> np.ndarray:
    p = str(path).lower()
    if p.endswith(".pgm"):
        return read_pgm(path)
    return read_raw_f64(path)
