"""Command-line front end: ``pnpqkd {fringe,sweep,session,maxdist,calibrate}``.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 solver or
precondition failure. Data goes to ``--out`` (with a ``.manifest.json``
alongside) or to standard output; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

from . import __version__
from .analytics import (
    calibrate_intrinsic_visibility,
    default_phase_grid,
    distance_sweep,
    fringe_scan,
    max_secure_distance,
)
from .config import SystemConfig, dump_config, load_config, parse_config
from .errors import ConfigError, ParameterError, SolverError
from .output import RunManifest, emit_csv, read_manifest, write_manifest
from .protocol import run_session

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

DEFAULTS_HELP = """\
defaults (the 100 km experiment; override with --config):
  source.mean_photon_number = 0.1        photons/pulse leaving Alice (measured setting)
  source.rep_rate_hz = 5e5               500 kHz, chosen to avoid afterpulsing
  source.laser_pulse_width_ns = 0.5      laser pulse width
  source.pm_window_ns = 20               phase-modulator window
  fiber.length_km = 100                  transmission distance
  fiber.loss_db_per_km = 0.25            fitted loss of the deployed fibre
  fiber.dispersion_ps_per_nm_km = 17     1.7 ns/nm per 100 km at 1.55 um
  detectorN.quantum_efficiency = 0.10    balanced gated APD at -106.5 C
  detectorN.dark_count_prob_per_gate = 2e-7   0.1 count/s at 500 kHz
  detectorN.gate_width_ns = 0.75         APD gate width
  detectorN.mode = balanced              conventional adds 17 dB of dark counts
  detectorN.afterpulse_prob = 0          negligible at 500 kHz
  interferometer.intrinsic_visibility = 0.87  calibrated to 83% fringe visibility at 100 km
  stray.reference_prob_per_pulse = 1.2e-6     0.6 count/s Rayleigh backscatter at 500 kHz
  stray.rep_rate_exponent = 2            a quarter when the rate is halved
  stray.plateau_min_km = 40              flat from 40 to 100 km, linear ramp below
  run.seed = 0
"""

class UsageError(Exception):
    pass

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value config file (see defaults below)")
    common.add_argument("--seed", type=int, help="master random seed (overrides run.seed)")

    parser = _Parser(prog="pnpqkd", description="Plug-and-play BB84 link simulator.",
                     epilog=DEFAULTS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                              epilog=DEFAULTS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)

    p = add("fringe", "click probability per detector versus phase difference")
    p.add_argument("--distance-km", type=float, default=100.0)
    p.add_argument("--points", type=int, default=101, help="phase points over [0, 2pi] (default 101)")
    p.add_argument("--pulses", type=_nonneg_int, default=0, help="pulses per point; 0 = analytic")
    p.add_argument("--out")

    p = add("sweep", "raw click probability and QBER versus distance")
    p.add_argument("--from-km", type=float, default=0.0)
    p.add_argument("--to-km", type=float, default=200.0)
    p.add_argument("--step-km", type=float, default=10.0)
    p.add_argument("--pulses", type=_nonneg_int, default=0, help="pulses per distance; 0 = analytic only")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")

    p = add("session", "one Monte-Carlo BB84 session")
    p.add_argument("--distance-km", type=float, default=100.0)
    p.add_argument("--pulses", type=_nonneg_int, default=1_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")

    p = add("maxdist", "largest distance with QBER at or below the threshold")
    p.add_argument("--qber-threshold", type=float, default=0.10)
    p.add_argument("--no-stray", action="store_true", help="disable backscatter stray light")

    p = add("calibrate", "re-derive the intrinsic visibility from the 100 km fringe visibility")
    p.add_argument("--target-visibility", type=float, default=0.83)
    p.add_argument("--distance-km", type=float, default=100.0)
    return parser

def _sweep_distances(start, stop, step):
    if step <= 0 or stop < start:
        raise ParameterError("need --step-km > 0 and --to-km >= --from-km")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]

def execute(command: str, options: dict, config: SystemConfig, out=None):
    """Run one subcommand on a resolved config; returns text for stdout, if any."""
    if command == "fringe":
        if options["points"] < 2:
            raise ParameterError("--points must be at least 2")
        scan = fringe_scan(config, options["distance_km"], default_phase_grid(options["points"]),
                           options["pulses"])
        emit_csv(scan, out)
    elif command == "sweep":
        distances = _sweep_distances(options["from_km"], options["to_km"], options["step_km"])
        emit_csv(distance_sweep(config, distances, options["pulses"], options.get("workers", 1)), out)
    elif command == "session":
        if options["pulses"] < 1:
            raise ParameterError("--pulses must be at least 1")
        record = run_session(config.at_distance(options["distance_km"]), options["pulses"],
                             workers=options.get("workers", 1))
        emit_csv([record], out)
    elif command == "maxdist":
        cfg = config.without_stray() if options["no_stray"] else config
        print(f"{max_secure_distance(cfg, options['qber_threshold']):.1f}")
    elif command == "calibrate":
        v = calibrate_intrinsic_visibility(config, options["target_visibility"], options["distance_km"])
        print(f"{v:.4f}")
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown command {command!r}")

def replay_manifest(path: str, out=None) -> None:
    """Re-run the command recorded in a manifest, writing its data to ``out``."""
    manifest = read_manifest(path)
    execute(manifest.command, manifest.options, parse_config(manifest.config), out)

def run_cli(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    options = {k: v for k, v in vars(args).items() if k not in ("command", "config", "seed", "out")}
    try:
        config = load_config(args.config) if args.config else SystemConfig()
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = getattr(args, "out", None)
    try:
        execute(args.command, options, config, out)
        if out not in (None, "-"):
            write_manifest(RunManifest(args.command, options, dump_config(config), config.seed), out)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK

def main():
    sys.exit(run_cli())
