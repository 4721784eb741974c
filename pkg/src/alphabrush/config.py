"""Run configuration with TOML round trip."""

from __future__ import annotations

import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

import tomli_w

from .bells import Ramp
from .covering import AlphaParams, Covering, build_covering

__all__ = ["RunConfig", "GridConfig", "DEFAULT_TOLERANCES", "load_config", "dump_config", "seed_from_env"]

DEFAULT_TOLERANCES = {
    "ramp": 1e-12,
    "bell": 1e-12,
    "projection": 1e-10,
    "gram_offdiag": 1e-7,
    "gram_diag": 1e-6,
    "telescoping": 1e-9,
    "roundtrip": 1e-5,
    "partition": 1e-12,
    "tail": 1e-14,
    "maxbound_factor": 10.0,
}


@dataclass(frozen=True)
class GridConfig:
    """Frequency axis settings.

    ``kind = "composite"`` builds a Gauss-Legendre axis refined at every knot
    (``extent`` then defaults to 1.05 times the outer square); ``"uniform"``
    uses the trapezoid rule with step ``step`` on ``[-extent, extent]``.
    """

    kind: str = "composite"
    spatial_extent: float = 2.0
    n_res: int = 18
    q_collar: int = 12
    q_gap: int = 32
    extent: float = 0.0
    step: float = 0.0

    def __post_init__(self):
        if self.kind not in ("composite", "uniform"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.kind == "uniform" and not (self.step > 0 and self.extent > 0):
            raise ValueError("uniform grids need positive step and extent")

    def axis(self, cov: Covering, features=()):
        from .grid import FrequencyAxis, axis_for_covering

        if self.kind == "uniform":
            return FrequencyAxis.uniform(self.extent, self.step, cov.axis_knots())
        return axis_for_covering(cov, spatial_extent=self.spatial_extent, n_res=self.n_res,
                                 q_collar=self.q_collar, q_gap=self.q_gap, features=features)


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.5
    r1: float = 1.0
    j_min: int = -2
    j_max: int = 4
    eps_rule: str = "hybrid"
    knot_rule: str = "equispaced"
    ramp_order: int = 3
    seed: int = 0
    output_dir: str = "out"
    grid: GridConfig = field(default_factory=GridConfig)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def params(self) -> AlphaParams:
        return AlphaParams(self.alpha, self.r1, self.j_min, self.j_max, self.eps_rule, self.knot_rule)

    def covering(self) -> Covering:
        return build_covering(self.params())

    def ramp(self) -> Ramp:
        return Ramp(self.ramp_order)

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = {k: float(v) for k, v in sorted(self.tolerances.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
        d = dict(d)
        if "grid" in d:
            gknown = {f.name for f in fields(GridConfig)}
            gbad = set(d["grid"]) - gknown
            if gbad:
                raise ValueError(f"unknown [grid] keys: {sorted(gbad)}")
            d["grid"] = GridConfig(**d["grid"])
        if "tolerances" in d:
            tbad = set(d["tolerances"]) - set(DEFAULT_TOLERANCES)
            if tbad:
                raise ValueError(f"unknown [tolerances] keys: {sorted(tbad)}")
            d["tolerances"] = {**DEFAULT_TOLERANCES, **{k: float(v) for k, v in d["tolerances"].items()}}
        return cls(**d)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def load_config(path) -> RunConfig:
    with open(path, "rb") as fh:
        return RunConfig.from_dict(tomllib.load(fh))


def dump_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())


def seed_from_env(default: int) -> int:
    v = os.environ.get("ALPHABRUSH_SEED", "").strip()
    return int(v) if v else int(default)


def write_resolved(cfg: RunConfig, out_dir) -> Path:
    p = Path(out_dir)
    p.mkdir(parents=True, exist_ok=True)
    target = p / "resolved_config.toml"
    target.write_text(dump_config(cfg))
    return target
