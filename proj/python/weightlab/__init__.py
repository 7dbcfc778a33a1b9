"""Discrete weighted-norm toolkit: grids, weights, norms, maximal operators and boundedness probes."""

import json

from ._core import (
    Error,
    Grid,
    InputError,
    ParameterError,
    UnsupportedError,
    Weight,
    ap_trend,
    bmo_norm,
    lebesgue_norm,
    lorentz_norm,
    maximal_hl,
    probe_tags,
    run_cli,
)
from ._core import probe as probe_json


def probe(theorem, **overrides):
    """Run a boundedness probe and return the report as a dict."""
    return json.loads(probe_json(theorem, {k: str(v) for k, v in overrides.items()}))


__all__ = [
    "Error",
    "Grid",
    "InputError",
    "ParameterError",
    "UnsupportedError",
    "Weight",
    "ap_trend",
    "bmo_norm",
    "lebesgue_norm",
    "lorentz_norm",
    "maximal_hl",
    "probe",
    "probe_json",
    "probe_tags",
    "run_cli",
]
