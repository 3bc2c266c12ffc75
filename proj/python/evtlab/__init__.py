"""Extremal index and cluster statistics for piecewise expanding maps."""

import json
import os

from ._evtlab import (
    ConfigError,
    EvtlabError,
    IndeterminateError,
    RegimeError,
    ResourceError,
    config_hash,
)
from . import _evtlab

__all__ = [
    "ConfigError",
    "EvtlabError",
    "IndeterminateError",
    "RegimeError",
    "ResourceError",
    "config_hash",
    "load",
    "run",
    "analytic",
    "oracle",
    "simulate",
    "tails",
    "qselect",
    "induced",
    "solve_threshold",
]


def load(config):
    """Return (text, name) for a config path or raw TOML text."""
    if os.path.exists(str(config)):
        with open(config, encoding="utf-8") as fh:
            return fh.read(), str(config)
    return str(config), "<string>"


def run(command, config, *, seed=None, orbits=None, levels=None, k_max=None, out_dir=None):
    text, name = load(config)
    if levels is not None and not isinstance(levels, str):
        levels = ",".join(str(v) for v in levels)
    report = _evtlab.run(command, text, name, seed, orbits, levels, k_max,
                         None if out_dir is None else str(out_dir))
    return json.loads(report)


def analytic(config, **kw):
    return run("analytic", config, **kw)


def oracle(config, **kw):
    return run("oracle", config, **kw)


def simulate(config, **kw):
    return run("simulate", config, **kw)


def tails(config, **kw):
    return run("tails", config, **kw)


def qselect(config, **kw):
    return run("qselect", config, **kw)


def induced(config, **kw):
    return run("induced", config, **kw)


def solve_threshold(config, n, tau):
    text, _ = load(config)
    return _evtlab.solve_threshold(text, str(n), str(tau))
