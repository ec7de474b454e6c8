"""File formats for patterns, field maps, crosstalk and BER results.

All writers produce byte-stable output: fixed float formatting, sorted JSON
keys, ``\\n`` line endings and a header carrying the tool version and the
SHA-256 of the canonical configuration.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ShapeMismatchError
from .hologram import MetasurfaceGeometry, PhasePattern, QuantizedPattern

TOOL = "vortexsim"
VERSION = __version__


def _meta(cfg) -> dict:
    return {"tool": TOOL, "version": VERSION, "config_sha256": cfg.sha256(), "config": cfg.to_dict()}


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_lines(path, lines) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _header(cfg) -> str:
    return f"# {TOOL} {VERSION} config_sha256={cfg.sha256()}"


def _g9(x) -> float:
    return float(f"{x:.9g}")


# -- patterns ---------------------------------------------------------------

def write_pattern_json(path, pattern, cfg) -> None:
    g = pattern.geometry
    doc = {
        "meta": _meta(cfg),
        "geometry": {"rows": g.rows, "cols": g.cols, "period": g.period},
        "assignments": [
            {"receiver": t.index, "mode": t.mode, "target": [float(c) for c in t.position]}
            for t in pattern.targets
        ],
    }
    if isinstance(pattern, QuantizedPattern):
        doc["levels"] = pattern.levels
        doc["insertion_loss_db"] = pattern.insertion_loss_db
        doc["states"] = [int(s) for s in pattern.states.reshape(-1)]
    else:
        doc["phase_rad"] = [_g9(p) for p in pattern.phase.reshape(-1)]
    _write_json(path, doc)


def write_pattern_csv(path, pattern, cfg) -> None:
    g = pattern.geometry
    quant = isinstance(pattern, QuantizedPattern)
    lines = [_header(cfg), "m,n,x,y,phase_rad" + (",state" if quant else "")]
    phase = pattern.phase
    for m in range(g.rows):
        for n in range(g.cols):
            x, y, _ = g.unit_position(m, n)
            row = f"{m},{n},{x:.9g},{y:.9g},{phase[m, n]:.9g}"
            if quant:
                row += f",{int(pattern.states[m, n])}"
            lines.append(row)
    _write_lines(path, lines)


def read_pattern_json(path, geometry: MetasurfaceGeometry | None = None):
    """Load a pattern file; if ``geometry`` is given the pattern must match it."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    gd = doc["geometry"]
    g = MetasurfaceGeometry(int(gd["rows"]), int(gd["cols"]), float(gd["period"]))
    if geometry is not None and g != geometry:
        raise ShapeMismatchError(
            f"pattern geometry {g.rows}x{g.cols} @ {g.period} m does not match "
            f"configured {geometry.rows}x{geometry.cols} @ {geometry.period} m"
        )
    if "states" in doc:
        states = np.asarray(doc["states"], dtype=np.int64)
        if states.size != g.size:
            raise ShapeMismatchError(f"expected {g.size} states, got {states.size}")
        return QuantizedPattern(g, states.reshape(g.shape), int(doc["levels"]),
                                float(doc.get("insertion_loss_db", 0.0)))
    phase = np.asarray(doc["phase_rad"], dtype=float)
    if phase.size != g.size:
        raise ShapeMismatchError(f"expected {g.size} phases, got {phase.size}")
    return PhasePattern(g, phase.reshape(g.shape))


# -- field maps ---------------------------------------------------------------

def write_fieldmap_csv(path, fmap, cfg) -> None:
    a, b = fmap.plane.axis_names
    u, v = fmap.plane.u(), fmap.plane.v()
    s = fmap.samples
    p = fmap.power_db
    lines = [_header(cfg), f"{a}_m,{b}_m,re,im,power_db"]
    for i in range(u.size):
        for j in range(v.size):
            lines.append(
                f"{u[i]:.9g},{v[j]:.9g},{s[i, j].real:.17g},{s[i, j].imag:.17g},{p[i, j]:.6f}"
            )
    _write_lines(path, lines)


def fieldmap_to_pgm(fmap, floor_db: float, cfg) -> bytes:
    """16-bit binary PGM; columns follow the first plane axis, rows the second
    (top row is the largest coordinate).  Power is clipped to [floor, 0] dB."""
    p = np.clip(fmap.power_db, floor_db, 0.0)
    level = np.rint((p - floor_db) / (-floor_db) * 65535.0).astype(">u2")
    img = level.T[::-1]  # (nv, nu), v descending
    h, w = img.shape
    head = f"P5\n{_header(cfg)}\n{w} {h}\n65535\n".encode("ascii")
    return head + np.ascontiguousarray(img).tobytes()


def write_fieldmap_pgm(path, fmap, floor_db, cfg) -> None:
    Path(path).write_bytes(fieldmap_to_pgm(fmap, floor_db, cfg))


def write_spots_json(path, spots, cfg, label) -> None:
    doc = {
        "meta": _meta(cfg),
        "illumination": label,
        "spots": [
            {
                "position": [_g9(c) for c in s.position],
                "peak_power_db": _g9(s.peak_power_db),
                "extent_3db": [_g9(e) for e in s.extent_3db],
            }
            for s in spots
        ],
    }
    _write_json(path, doc)


# -- crosstalk ----------------------------------------------------------------

def gains_checksum(gains) -> str:
    """SHA-256 over the exact repr of every complex gain, row-major."""
    g = np.asarray(gains, dtype=complex)
    text = ";".join(f"{repr(float(z.real))},{repr(float(z.imag))}" for z in g.reshape(-1))
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def write_crosstalk_json(path, xt, cfg) -> None:
    gains = np.asarray(xt.gains, dtype=complex)
    doc = {
        "meta": _meta(cfg),
        "modes": [int(m) for m in xt.modes],
        "receivers": [int(r) for r in xt.receivers],
        "assigned": [int(a) for a in xt.assigned],
        "gains": [[[float(z.real), float(z.imag)] for z in row] for row in gains],
        "power_db": [[_g9(v) for v in row] for row in xt.power_db],
        "isolation_db": [_g9(v) for v in xt.isolation_db],
        "channel_matrix": [[[float(z.real), float(z.imag)] for z in row]
                           for row in xt.channel_matrix()],
        "gains_sha256": gains_checksum(gains),
    }
    _write_json(path, doc)


def read_channel_json(path):
    """Channel matrix H[p][q] from a crosstalk file, verified against its checksum."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    gains = np.array([[complex(re, im) for re, im in row] for row in doc["gains"]])
    if gains_checksum(gains) != doc["gains_sha256"]:
        raise ShapeMismatchError("crosstalk gains do not match their checksum")
    h = np.array([[complex(re, im) for re, im in row] for row in doc["channel_matrix"]])
    return h, doc["gains_sha256"]


# -- BER ----------------------------------------------------------------------

def write_ber_csv(path, curve, cfg) -> None:
    lines = [_header(cfg), "stream,snr_db,bits,errors,ber"]
    for p in curve.points:
        lines.append(f"{p.stream},{p.snr_db:.6g},{p.bits},{p.errors},{p.ber:.9e}")
    _write_lines(path, lines)


def write_constellation_csv(path, dump, cfg) -> None:
    lines = [_header(cfg), "stream,re,im"]
    for s, syms in enumerate(dump.symbols):
        for z in syms:
            lines.append(f"{s},{z.real:.9g},{z.imag:.9g}")
    _write_lines(path, lines)


def write_ber_json(path, curve, channel, cfg, xtalk_sha256=None) -> None:
    h = np.asarray(channel, dtype=complex)
    doc = {
        "meta": _meta(cfg),
        "snr_definition": "Es/N0 per receiver (Eb/N0 = Es/N0 - 3.0103 dB)",
        "channel_matrix": [[[float(z.real), float(z.imag)] for z in row] for row in h],
        "xtalk_gains_sha256": xtalk_sha256,
        "snr_db": list(curve.snr_db),
        "reference_ber": [float(f"{r:.9e}") for r in curve.reference],
        "streams": [
            [{"snr_db": p.snr_db, "bits": p.bits, "errors": p.errors} for p in curve.stream(s)]
            for s in range(h.shape[0])
        ],
    }
    _write_json(path, doc)
