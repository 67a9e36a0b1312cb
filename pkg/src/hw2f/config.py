"""
YAML run configuration for the command-line driver.

A config file has up to four top-level sections::

    curve:        {flat_rate: 0.02}  or  {pillars: [[1, 0.98], [5, 0.90]]}
    model:        {a1, a2, numeraire_maturity?, vol: {terminal: {...}} | {constant: {...}}}
    mc:           {paths, seed}
    experiment:   subcommand-specific keys (see ``EXPERIMENT_KEYS``)

Unknown keys anywhere are rejected with a :class:`ConfigurationError`.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
import yaml

from .curve import ConstantSigma, DiscountCurve, Hw2fParams, TerminalCovariance
from .errors import ConfigurationError
from .montecarlo import McConfig
from .swaps import SwapSpec, par_rate

__all__ = [
    "RunConfig",
    "EXPERIMENT_KEYS",
    "load_config",
    "parse_config",
    "parse_grid",
    "parse_swap",
    "params_to_dict",
]

_TOP_KEYS = {"curve", "model", "mc", "experiment"}

EXPERIMENT_KEYS = {
    "region": {"observation", "short_end", "long_end"},
    "corr-curve": {"observation", "short_end", "long_end", "delta", "rho_grid"},
    "scatter": {"observation", "short_end", "long_end", "delta"},
    "maturity-sweep": {"observation", "short_end", "long_end_grid", "delta", "rho_m"},
    "exposure": {
        "observation",
        "swaps",
        "rho_grid",
        "calibration",
        "recalibrate",
        "cva",
    },
    "calibrate": {"observation", "level", "correlation"},
}

_ALL_EXPERIMENT_KEYS = set().union(*EXPERIMENT_KEYS.values())


@dataclass(frozen=True)
class RunConfig:
    curve: DiscountCurve
    params: Hw2fParams
    mc: McConfig
    experiment: Dict[str, Any] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict)


def _section(d, where, allowed, required=()):
    if d is None:
        d = {}
    if not isinstance(d, dict):
        raise ConfigurationError(f"{where} must be a mapping")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(map(str, unknown))}")
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigurationError(f"missing key(s) in {where}: {', '.join(missing)}")
    return d


def _num(d, key, where, default=None):
    if key not in d:
        if default is None:
            raise ConfigurationError(f"missing key {where}.{key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"{where}.{key} must be a number")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigurationError(f"{where}.{key} must be finite")
    return v


def _int(d, key, where, default):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigurationError(f"{where}.{key} must be an integer")
    return v


def _parse_curve(d):
    d = _section(d, "curve", {"flat_rate", "pillars", "nonnegative_rates"})
    nonneg = bool(d.get("nonnegative_rates", False))
    if ("flat_rate" in d) == ("pillars" in d):
        raise ConfigurationError("curve needs exactly one of flat_rate or pillars")
    if "flat_rate" in d:
        return DiscountCurve.flat(_num(d, "flat_rate", "curve"), nonnegative_rates=nonneg)
    pillars = d["pillars"]
    if not isinstance(pillars, list) or not pillars:
        raise ConfigurationError("curve.pillars must be a non-empty list of [time, discount]")
    pts = []
    for p in pillars:
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise ConfigurationError("each pillar must be a [time, discount] pair")
        pts.append((float(p[0]), float(p[1])))
    return DiscountCurve.from_pillars(pts, nonnegative_rates=nonneg)


def _parse_vol(d):
    d = _section(d, "model.vol", {"terminal", "constant"})
    if len(d) != 1:
        raise ConfigurationError("model.vol needs exactly one of terminal or constant")
    if "constant" in d:
        c = _section(d["constant"], "model.vol.constant", {"sigma1", "sigma2", "rho12"},
                     ("sigma1", "sigma2", "rho12"))
        where = "model.vol.constant"
        return ConstantSigma(_num(c, "sigma1", where), _num(c, "sigma2", where), _num(c, "rho12", where))
    where = "model.vol.terminal"
    t = _section(d["terminal"], where, {"horizon", "xi1", "xi2", "sqrt_xi1", "vol_ratio", "rho_m"},
                 ("horizon", "rho_m"))
    direct = {"xi1", "xi2"} & set(t)
    knobs = {"sqrt_xi1", "vol_ratio"} & set(t)
    if direct and knobs:
        raise ConfigurationError(f"{where} mixes xi1/xi2 with sqrt_xi1/vol_ratio")
    if knobs:
        return TerminalCovariance.from_vol_ratio(
            _num(t, "horizon", where), _num(t, "sqrt_xi1", where),
            _num(t, "vol_ratio", where), _num(t, "rho_m", where),
        )
    return TerminalCovariance(
        _num(t, "horizon", where), _num(t, "xi1", where), _num(t, "xi2", where), _num(t, "rho_m", where)
    )


def _parse_model(d):
    d = _section(d, "model", {"a1", "a2", "vol", "numeraire_maturity"}, ("a1", "a2", "vol"))
    S = d.get("numeraire_maturity")
    return Hw2fParams(
        a1=_num(d, "a1", "model"),
        a2=_num(d, "a2", "model"),
        vol=_parse_vol(d["vol"]),
        numeraire_maturity=None if S is None else _num(d, "numeraire_maturity", "model"),
    )


def _parse_mc(d, seed=None, paths=None):
    d = _section(d, "mc", {"paths", "seed"})
    n = paths if paths is not None else _int(d, "paths", "mc", 10_000)
    s = seed if seed is not None else _int(d, "seed", "mc", 0)
    return McConfig(n_paths=n, seed=s)


def parse_config(data, seed=None, paths=None):
    """
    Validate a parsed YAML mapping; ``seed`` and ``paths`` override the ``mc`` section.

    Experiment keys are checked against those of every subcommand so one
    file can drive several of them.
    """
    data = _section(data, "config", _TOP_KEYS, ("curve", "model"))
    experiment = _section(data.get("experiment"), "experiment", _ALL_EXPERIMENT_KEYS)
    return RunConfig(
        curve=_parse_curve(data["curve"]),
        params=_parse_model(data["model"]),
        mc=_parse_mc(data.get("mc"), seed, paths),
        experiment=dict(experiment),
        raw=data,
    )


def load_config(path, seed=None, paths=None):
    """Read and validate a YAML config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config {path} is not valid YAML: {exc}") from exc
    return parse_config(data, seed, paths)


def parse_grid(value, where):
    """A list of numbers, or ``{start, stop, num}`` for an evenly spaced grid."""
    if isinstance(value, dict):
        g = _section(value, where, {"start", "stop", "num"}, ("start", "stop", "num"))
        num = _int(g, "num", where, None)
        if num < 1:
            raise ConfigurationError(f"{where}.num must be positive")
        return [float(x) for x in np.linspace(_num(g, "start", where), _num(g, "stop", where), num)]
    if isinstance(value, list) and value:
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigurationError(f"{where} must contain numbers only")
            out.append(float(v))
        return out
    raise ConfigurationError(f"{where} must be a non-empty list or a start/stop/num mapping")


def parse_swap(d, where, observation, curve):
    """One swap mapping; ``strike`` is a number or ``"atm"`` (forward par rate)."""
    d = _section(d, where, {"start", "end", "delta", "strike", "direction", "notional"}, ("end",))
    start = _num(d, "start", where, observation)
    delta = _num(d, "delta", where, 0.25)
    spec = SwapSpec(
        start=start,
        end=_num(d, "end", where),
        delta=delta,
        direction=str(d.get("direction", "payer")),
        notional=_num(d, "notional", where, 1.0),
    )
    strike = d.get("strike", 0.0)
    if isinstance(strike, str):
        if strike.lower() != "atm":
            raise ConfigurationError(f"{where}.strike must be a number or 'atm'")
        strike = par_rate(curve, spec)
    else:
        strike = _num(d, "strike", where)
    return SwapSpec(spec.start, spec.end, spec.delta, strike, spec.direction, spec.notional)


def params_to_dict(params):
    """Model section for ``params`` in the config schema (floats kept at full precision)."""
    v = params.vol
    if isinstance(v, ConstantSigma):
        vol = {"constant": {"sigma1": v.sigma1, "sigma2": v.sigma2, "rho12": v.rho12}}
    else:
        vol = {"terminal": {"horizon": v.horizon, "xi1": v.xi1, "xi2": v.xi2, "rho_m": v.rho_m}}
    out = {"a1": params.a1, "a2": params.a2, "vol": vol}
    if params.numeraire_maturity is not None:
        out["numeraire_maturity"] = params.numeraire_maturity
    return out


def require_observation(experiment) -> float:
    if "observation" not in experiment:
        raise ConfigurationError("missing key experiment.observation")
    return _num(experiment, "observation", "experiment")


def number(d, key, where, default=None) -> Optional[float]:
    return _num(d, key, where, default)


def section(d, where, allowed, required=()):
    return _section(d, where, allowed, required)
