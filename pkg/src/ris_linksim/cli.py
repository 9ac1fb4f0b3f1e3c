"""Command-line entry point: ``ris-linksim simulate|calc|selftest``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from . import analysis
from .harness.config import SCHEMES, ConfigError, config_from_mapping, parse_config
from .harness.output import emit_results
from .harness.runner import TrialAssertionError, run_scenario

log = logging.getLogger("ris_linksim")


def parse_sweep(text: str) -> tuple[float, ...]:
    """``"start:stop:step"`` -> inclusive grid of distances."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("sweep needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(start + i * step) for i in range(count))


def parse_schemes(text: str) -> tuple[str, ...]:
    schemes = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        raise argparse.ArgumentTypeError(f"schemes must be a comma list from {', '.join(SCHEMES)}")
    return schemes


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ris-linksim", description="Passive/active RIS link-level simulator.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr (-vv for per-trial)")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the sum-rate versus distance sweep")
    sim.add_argument("--config", metavar="PATH", help="JSON scenario file (defaults otherwise)")
    sim.add_argument("--seed", type=_u64, help="master seed")
    sim.add_argument("--trials", type=_positive_int, help="trials per distance")
    sim.add_argument("--sweep", type=parse_sweep, metavar="START:STOP:STEP", help="distances L in meters")
    sim.add_argument("--schemes", type=parse_schemes, metavar="LIST", help=f"comma list from {','.join(SCHEMES)}")
    sim.add_argument("--workers", type=_positive_int, help="worker processes")
    sim.add_argument("--out", metavar="PATH", help="output file (stdout otherwise)")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")

    calc = sub.add_parser("calc", help="closed-form calculators")
    csub = calc.add_subparsers(dest="calc", required=True)
    re_ = csub.add_parser("required-elements", help="RIS elements needed to match the direct link")
    re_.add_argument("--d", type=float, required=True, help="transmitter-receiver distance (m)")
    re_.add_argument("--dt", type=float, required=True, help="transmitter-RIS distance (m)")
    re_.add_argument("--dr", type=float, required=True, help="RIS-receiver distance (m)")
    re_.add_argument("--freq-ghz", type=float, required=True)
    re_.add_argument("--spacing", type=float, default=0.5, help="element spacing in wavelengths")
    re_.add_argument("--nominal-wavelength", action="store_true", help="use c = 3e8 m/s wavelengths")

    nf = csub.add_parser("noise-floor", help="thermal noise of N active elements")
    nf.add_argument("--bandwidth-mhz", type=float, required=True)
    nf.add_argument("--elements", type=int, default=1)
    nf.add_argument("--temperature", type=float, default=290.0, help="kelvin")
    nf.add_argument("--path-loss-db", type=float, default=0.0, help="loss applied before the receiver")

    pg = csub.add_parser("path-gain", help="multiplicative versus additive distance factors")
    pg.add_argument("--dt", type=float, required=True)
    pg.add_argument("--dr", type=float, required=True)

    ag = csub.add_parser("array-gain-scaling", help="co-phased SNR versus element count")
    ag.add_argument("--n-min", type=int, default=100)
    ag.add_argument("--n-max", type=int, default=10000)
    ag.add_argument("--points", type=int, default=21)
    ag.add_argument("--per-element-noise", type=float, required=True, help="watts")
    ag.add_argument("--receiver-noise", type=float, required=True, help="watts")
    ag.add_argument("--signal-gain", type=float, default=1.0)
    ag.add_argument("--noise-path-gain", type=float, default=1.0)

    sub.add_parser("selftest", help="run built-in oracle checks")
    return p


def _simulate(args) -> int:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = config_from_mapping({})
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.sweep is not None:
        overrides["L_values"] = args.sweep
    if args.schemes is not None:
        overrides["schemes"] = args.schemes
    if args.workers is not None:
        overrides["workers"] = args.workers
    cfg = dataclasses.replace(cfg, **overrides)
    result = run_scenario(cfg)
    emit_results(result, args.format, args.out)
    return 0


def _calc(args) -> int:
    if args.calc == "required-elements":
        s = analysis.DeploymentScenario(args.d, args.dt, args.dr, args.freq_ghz * 1e9, args.spacing)
        print(analysis.required_elements(s, nominal_wavelength=args.nominal_wavelength))
    elif args.calc == "noise-floor":
        dbm = analysis.thermal_noise_floor_dbm(args.bandwidth_mhz * 1e6, args.temperature, args.elements)
        print(f"{dbm - args.path_loss_db:.2f} dBm")
    elif args.calc == "path-gain":
        mult, add = analysis.path_gain_comparison(args.dt, args.dr)
        print(f"multiplicative {mult:.6g}")
        print(f"additive {add:.6g}")
        print(f"ratio {add / mult:.6g}")
    elif args.calc == "array-gain-scaling":
        if args.points < 2 or args.n_max <= args.n_min:
            raise ValueError("need --points >= 2 and --n-max > --n-min")
        ns = np.unique(np.round(np.logspace(np.log10(args.n_min), np.log10(args.n_max), args.points)))
        curve = analysis.array_gain_scaling(ns, args.per_element_noise, args.receiver_noise,
                                            args.signal_gain, args.noise_path_gain)
        print("N,snr_db")
        for n, snr in curve:
            print(f"{n},{10 * np.log10(snr):.6f}")
        print(f"# log-log slope {analysis.loglog_slope(curve):.4f}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "calc":
            return _calc(args)
        from .selftest import run_selftest

        return 0 if run_selftest() else 1
    except (ConfigError, ValueError, OSError, TrialAssertionError) as exc:
        print(f"ris-linksim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
