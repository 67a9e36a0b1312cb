"""
``hw2f <subcommand> --config FILE --out FILE [--seed N] [--paths N]``

Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
degeneracy (zero variance, unattainable calibration target).
"""

import argparse
import sys

import yaml

from . import config as cfg
from ._io import write_csv
from .errors import ConfigurationError, DegenerateError, DomainError, UnattainableTargetError
from .exposure import (
    NettingSet,
    cva_flat_hazard,
    exposure_csv,
    exposure_profile,
    exposure_vs_rho_curve,
)
from .montecarlo import scatter_csv, simulate_swap_pair
from .swaps import (
    SwapSpec,
    calibrate_level,
    calibrate_rho,
    classify_region,
    correlation_curve,
    maturity_sweep,
    swap_correlation,
    implied_normal_vol,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

_DEFAULT_RHO_GRID = {"start": 1.0, "stop": -1.0, "num": 41}


def _pair(rc):
    e = rc.experiment
    T_n = cfg.require_observation(e)
    delta = cfg.number(e, "delta", "experiment", 0.25)
    short = SwapSpec(T_n, cfg.number(e, "short_end", "experiment"), delta)
    long_ = SwapSpec(T_n, cfg.number(e, "long_end", "experiment"), delta)
    return T_n, short, long_


def cmd_region(rc, out):
    e = rc.experiment
    T_n = cfg.require_observation(e)
    rep = classify_region(
        rc.params, T_n, cfg.number(e, "short_end", "experiment"), cfg.number(e, "long_end", "experiment")
    )
    write_csv(
        out,
        ["region", "ratio_vol", "ratio_short", "ratio_long", "limit_sign"],
        [(rep.region, rep.ratio_vol, rep.ratio_short, rep.ratio_long, rep.limit_sign)],
    )
    print(f"region={rep.region}")
    print(f"ratio_vol={rep.ratio_vol:.12g}")
    print(f"ratio_short={rep.ratio_short:.12g}")
    print(f"ratio_long={rep.ratio_long:.12g}")
    print(f"limit_sign={rep.limit_sign}")


def cmd_corr_curve(rc, out):
    T_n, short, long_ = _pair(rc)
    grid = cfg.parse_grid(rc.experiment.get("rho_grid", _DEFAULT_RHO_GRID), "experiment.rho_grid")
    rows = correlation_curve(rc.params, T_n, short, long_, grid, rc.curve)
    write_csv(out, ["rho_m", "rho_swap"], rows)


def cmd_scatter(rc, out):
    _, short, long_ = _pair(rc)
    res = simulate_swap_pair(rc.curve, rc.params, short, long_, rc.mc)
    scatter_csv(res, out)
    print(f"rho_swap={res.correlation:.12g} stderr={res.stderr:.12g}")


def cmd_maturity_sweep(rc, out):
    e = rc.experiment
    T_n = cfg.require_observation(e)
    if "long_end_grid" not in e:
        raise ConfigurationError("missing key experiment.long_end_grid")
    grid = cfg.parse_grid(e["long_end_grid"], "experiment.long_end_grid")
    rho_m = e.get("rho_m")
    rows = maturity_sweep(
        rc.params,
        T_n,
        cfg.number(e, "short_end", "experiment"),
        grid,
        delta=cfg.number(e, "delta", "experiment", 0.25),
        rho_m=None if rho_m is None else cfg.number(e, "rho_m", "experiment"),
        curve=rc.curve,
    )
    write_csv(out, ["long_end", "rho_swap", "region"], rows)


def _calibration(e, T_n, curve):
    c = cfg.section(e.get("calibration"), "experiment.calibration", {"end", "delta", "target_vol"},
                    ("end", "target_vol"))
    spec = SwapSpec(T_n, cfg.number(c, "end", "experiment.calibration"),
                    cfg.number(c, "delta", "experiment.calibration", 0.25))
    return spec, cfg.number(c, "target_vol", "experiment.calibration")


def cmd_exposure(rc, out):
    e = rc.experiment
    T_n = cfg.require_observation(e)
    swaps = e.get("swaps")
    if not isinstance(swaps, list) or not swaps:
        raise ConfigurationError("experiment.swaps must be a non-empty list")
    ns = NettingSet([cfg.parse_swap(s, f"experiment.swaps[{i}]", T_n, rc.curve) for i, s in enumerate(swaps)])
    recalibrate = e.get("recalibrate", False)
    if not isinstance(recalibrate, bool):
        raise ConfigurationError("experiment.recalibrate must be true or false")
    cal_spec, target = (None, None)
    if "calibration" in e:
        cal_spec, target = _calibration(e, T_n, rc.curve)
    elif recalibrate:
        raise ConfigurationError("experiment.recalibrate needs experiment.calibration")
    grid = cfg.parse_grid(e.get("rho_grid", _DEFAULT_RHO_GRID), "experiment.rho_grid")
    rows = exposure_vs_rho_curve(
        rc.curve, rc.params, ns, T_n, grid, rc.mc,
        calibration_swap=cal_spec, target_vol=target, recalibrate=recalibrate,
    )
    exposure_csv(rows, out)

    if "cva" in e:
        c = cfg.section(e["cva"], "experiment.cva", {"hazard", "lgd", "times"}, ("hazard",))
        times = cfg.parse_grid(c.get("times", [0.0, T_n]), "experiment.cva.times")
        params = rc.params
        if cal_spec is not None:
            if not recalibrate:
                params = params.with_rho_m(T_n, 0.0)
            params = calibrate_level(params, T_n, cal_spec, rc.curve, target).params
        profile = exposure_profile(rc.curve, params, ns, times, rc.mc)
        value = cva_flat_hazard(profile, cfg.number(c, "hazard", "experiment.cva"),
                                cfg.number(c, "lgd", "experiment.cva", 1.0))
        print(f"cva={value:.12g}")


def cmd_calibrate(rc, out):
    """Write a config identical to the input but with the calibrated model section."""
    e = rc.experiment
    T_n = cfg.require_observation(e)
    if "level" not in e and "correlation" not in e:
        raise ConfigurationError("calibrate needs experiment.level and/or experiment.correlation")
    params = rc.params.at_horizon(T_n)
    if "correlation" in e:
        c = cfg.section(e["correlation"], "experiment.correlation",
                        {"short_end", "long_end", "delta", "target"}, ("short_end", "long_end", "target"))
        w = "experiment.correlation"
        delta = cfg.number(c, "delta", w, 0.25)
        short = SwapSpec(T_n, cfg.number(c, "short_end", w), delta)
        long_ = SwapSpec(T_n, cfg.number(c, "long_end", w), delta)
        res = calibrate_rho(params, T_n, short, long_, cfg.number(c, "target", w), rc.curve)
        params = res.params
        print(f"rho_m={res.rho_m:.12g} roots={res.n_roots} "
              f"rho_swap={swap_correlation(params, T_n, short, long_, rc.curve):.12g}")
    if "level" in e:
        c = cfg.section(e["level"], "experiment.level", {"end", "delta", "target_vol"}, ("end", "target_vol"))
        w = "experiment.level"
        spec = SwapSpec(T_n, cfg.number(c, "end", w), cfg.number(c, "delta", w, 0.25))
        res = calibrate_level(params, T_n, spec, rc.curve, cfg.number(c, "target_vol", w))
        params = res.params
        print(f"scale={res.scale:.12g} normal_vol={implied_normal_vol(params, T_n, spec, rc.curve):.12g}")
    doc = dict(rc.raw)
    doc["model"] = cfg.params_to_dict(params)
    text = yaml.safe_dump(doc, sort_keys=False)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(text, end="")


COMMANDS = {
    "region": cmd_region,
    "corr-curve": cmd_corr_curve,
    "scatter": cmd_scatter,
    "maturity-sweep": cmd_maturity_sweep,
    "exposure": cmd_exposure,
    "calibrate": cmd_calibrate,
}


def build_parser():
    p = argparse.ArgumentParser(prog="hw2f", description="Two-factor Hull-White swap-rate correlation experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="YAML run configuration")
        s.add_argument("--out", required=True, help="output file (CSV; YAML for calibrate)")
        s.add_argument("--seed", type=int, help="override mc.seed")
        s.add_argument("--paths", type=int, help="override mc.paths")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        rc = cfg.load_config(args.config, seed=args.seed, paths=args.paths)
        COMMANDS[args.command](rc, args.out)
    except (DegenerateError, UnattainableTargetError) as exc:
        print(f"hw2f: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigurationError, DomainError) as exc:
        print(f"hw2f: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"hw2f: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
