"""Command-line entry point: ``vortexsim <design|scan|spots|xtalk|ber>``."""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import export
from .config import load_config
from .errors import (
    ConfigError,
    DegenerateSumError,
    DomainError,
    SamplingError,
    ShapeMismatchError,
    SingularityError,
)
from .hologram import QuantizedPattern
from .link import ber_sweep
from .scenario import Scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEGENERATE = 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario JSON file")
    common.add_argument("--pattern", help="pattern JSON written by 'design' (default: synthesize)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--quantized", action="store_true", help="use the L-level quantized pattern")
    common.add_argument("--workers", type=int, default=1, help="threads for field evaluation")
    sel = common.add_mutually_exclusive_group()
    sel.add_argument("--mode", type=int, help="illuminate with this mode only")
    sel.add_argument("--both", action="store_true", help="all assigned modes at once (default)")

    p = argparse.ArgumentParser(prog="vortexsim", description="Vortex-wave metasurface SDM simulator")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("design", parents=[common], help="synthesize continuous and quantized patterns")
    sub.add_parser("scan", parents=[common], help="field map on the configured plane")
    sub.add_parser("spots", parents=[common], help="focal spots found in the field map")
    sub.add_parser("xtalk", parents=[common], help="mode-by-receiver focal gains and isolation")
    ber = sub.add_parser("ber", parents=[common], help="Monte-Carlo BER over the focal channel")
    ber.add_argument("--xtalk", help="crosstalk JSON to take the channel from")
    ber.add_argument("--zero-offdiag", action="store_true", help="remove inter-stream leakage")
    ber.add_argument("--isolation-db", type=float,
                     help="rescale leakage so the strongest interferer sits this far below the direct gain")
    return p


def _suffix(args) -> str:
    return "_q" if args.quantized else ""


def _pattern(sc: Scenario, args):
    if args.pattern:
        path = Path(args.pattern)
        if not path.is_file():
            raise FileNotFoundError(f"pattern file not found: {path}")
        pat = export.read_pattern_json(path, sc.geometry)
    else:
        pat = sc.design()
    if args.quantized and not isinstance(pat, QuantizedPattern):
        pat = sc.quantize(pat)
    return pat


def _modes(sc: Scenario, args):
    if args.mode is None:
        return sc.modes, "both"
    if args.mode not in sc.modes:
        raise DomainError(f"mode {args.mode} is not assigned in this scenario (have {list(sc.modes)})")
    return (args.mode,), f"mode{args.mode}"


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_design(sc: Scenario, args) -> None:
    out = _out(args)
    for m, n in sc.near_degenerate_units():
        print(f"warning: near-degenerate hologram sum at unit ({m}, {n})", file=sys.stderr)
    pat = sc.design()
    q = sc.quantize(pat)
    cfg = sc.config
    export.write_pattern_json(out / "pattern.json", pat, cfg)
    export.write_pattern_csv(out / "pattern.csv", pat, cfg)
    export.write_pattern_json(out / "pattern_q.json", q, cfg)
    export.write_pattern_csv(out / "pattern_q.csv", q, cfg)
    print(f"wrote {pat.geometry.size}-unit patterns to {out}")


def cmd_scan(sc: Scenario, args) -> None:
    out = _out(args)
    modes, label = _modes(sc, args)
    fmap = sc.scan(_pattern(sc, args), modes, args.workers)
    stem = f"field_{label}{_suffix(args)}"
    export.write_fieldmap_csv(out / f"{stem}.csv", fmap, sc.config)
    export.write_fieldmap_pgm(out / f"{stem}.pgm", fmap, sc.config.scan.floor_db, sc.config)
    print(f"wrote {stem}.csv and {stem}.pgm to {out}")


def cmd_spots(sc: Scenario, args) -> None:
    out = _out(args)
    modes, label = _modes(sc, args)
    fmap = sc.scan(_pattern(sc, args), modes, args.workers)
    spots = sc.spots(fmap)
    export.write_spots_json(out / f"spots_{label}{_suffix(args)}.json", spots, sc.config, label)
    for s in spots:
        x, y, z = s.position
        print(f"spot ({x:+.4f}, {y:+.4f}, {z:+.4f}) m  {s.peak_power_db:6.2f} dB")


def cmd_xtalk(sc: Scenario, args) -> None:
    out = _out(args)
    xt = sc.crosstalk(_pattern(sc, args), args.workers)
    export.write_crosstalk_json(out / f"xtalk{_suffix(args)}.json", xt, sc.config)
    for r, mode, iso in zip(xt.receivers, xt.assigned, xt.isolation_db):
        print(f"receiver {r} (mode {mode}): isolation {iso:.2f} dB")


def _set_isolation(h: np.ndarray, iso_db: float) -> np.ndarray:
    h = h.copy()
    for p in range(h.shape[0]):
        off = [q for q in range(h.shape[1]) if q != p]
        peak = max(abs(h[p, q]) for q in off)
        if peak == 0:
            raise DomainError(f"receiver {p} has no leakage to rescale")
        scale = abs(h[p, p]) * 10.0 ** (-iso_db / 20.0) / peak
        for q in off:
            h[p, q] *= scale
    return h


def cmd_ber(sc: Scenario, args) -> None:
    out = _out(args)
    if args.xtalk:
        path = Path(args.xtalk)
        if not path.is_file():
            raise FileNotFoundError(f"crosstalk file not found: {path}")
        h, checksum = export.read_channel_json(path)
    else:
        xt = sc.crosstalk(_pattern(sc, args), args.workers)
        h, checksum = xt.channel_matrix(), export.gains_checksum(xt.gains)
    if args.isolation_db is not None:
        h = _set_isolation(h, args.isolation_db)
    if args.zero_offdiag:
        h = np.diag(np.diagonal(h))
    curve, dump = ber_sweep(sc.link_config(h), sc.config.link.snr_db, args.workers)
    sfx = _suffix(args)
    export.write_ber_csv(out / f"ber{sfx}.csv", curve, sc.config)
    export.write_constellation_csv(out / f"constellation{sfx}.csv", dump, sc.config)
    export.write_ber_json(out / f"ber{sfx}.json", curve, h, sc.config, checksum)
    for p in curve.points:
        print(f"stream {p.stream}  Es/N0 {p.snr_db:5.1f} dB  BER {p.ber:.3e}  ({p.errors}/{p.bits})")


COMMANDS = {"design": cmd_design, "scan": cmd_scan, "spots": cmd_spots,
            "xtalk": cmd_xtalk, "ber": cmd_ber}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise DomainError("--workers must be >= 1")
        sc = Scenario(load_config(args.config))
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            COMMANDS[args.command](sc, args)
    except DegenerateSumError as exc:
        units = ", ".join(f"({m}, {n})" for m, n in exc.units)
        print(f"error: degenerate hologram sum at unit(s) {units}", file=sys.stderr)
        return EXIT_DEGENERATE
    except SingularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigError, DomainError, SamplingError, ShapeMismatchError,
            FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
