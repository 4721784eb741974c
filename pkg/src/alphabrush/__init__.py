"""Brushlet transforms on alpha-coverings of the frequency plane."""

from .approx import MTermPlan, error_curve, threshold_m
from .bells import DEFAULT_RAMP, Bell, Ramp, central_bell_hat, central_bell_time, decay_certificate
from .brushlet1d import BrushletIndex1D, IntervalOperator, analyze_interval, brushlet_hat, brushlet_time
from .brushlet2d import BrushletIndex2D, BrushletSystem, CoeffMap
from .config import GridConfig, RunConfig
from .covering import (AlphaParams, Covering, CoveringError, Interval, Rect, build_covering,
                       covering_from_json, covering_to_json, validate_covering)
from .grid import FrequencyAxis, MisalignedGridError, SpectrumGrid, axis_for_covering
from .maximal import check_maxbound, hl_maximal, peetre_maximal
from .spaces import (BAPU, HybridWeight, NormParams, mod_norm, sequence_norm, sfunc_norm, tl_norm,
                     ubox, ubox_overlap)

__version__ = "0.1.0"

__all__ = [
    "AlphaParams", "Covering", "CoveringError", "Interval", "Rect", "build_covering", "covering_from_json",
    "covering_to_json", "validate_covering",
    "Ramp", "Bell", "DEFAULT_RAMP", "central_bell_hat", "central_bell_time", "decay_certificate",
    "BrushletIndex1D", "IntervalOperator", "analyze_interval", "brushlet_hat", "brushlet_time",
    "BrushletIndex2D", "BrushletSystem", "CoeffMap",
    "FrequencyAxis", "SpectrumGrid", "MisalignedGridError", "axis_for_covering",
    "HybridWeight", "NormParams", "BAPU", "sequence_norm", "sfunc_norm", "tl_norm", "mod_norm", "ubox",
    "ubox_overlap",
    "MTermPlan", "threshold_m", "error_curve",
    "hl_maximal", "peetre_maximal", "check_maxbound",
    "RunConfig", "GridConfig",
]
