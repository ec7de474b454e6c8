"""Scalar Huygens propagation from the metasurface into the half-space z > 0.

Every unit re-radiates its transmitted complex amplitude as an isotropic
spherical wave (no obliquity factor).  Scans are evaluated in fixed-size
chunks of observation points; the per-point sum over units always runs in
row-major unit order, so results do not depend on chunking or on the number
of worker threads.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DomainError, ShapeMismatchError, SingularityError
from .hologram import MetasurfaceGeometry
from .waves import (
    SimulationConstants,
    SourceAmplitudes,
    UcaGenerator,
    reference_wave,
    uca_incident_field,
)

ANALYTIC = "analytic"
DISCRETE_UCA = "discrete-uca"
_CHUNK = 1024


@dataclass(frozen=True)
class SourceModel:
    kind: str = ANALYTIC
    position: tuple = (0.0, 0.0, -0.5)
    amplitudes: SourceAmplitudes = field(default_factory=SourceAmplitudes)
    generator: UcaGenerator | None = None

    def __post_init__(self):
        if self.kind not in (ANALYTIC, DISCRETE_UCA):
            raise DomainError(f"unknown source kind {self.kind!r}")
        if self.kind == DISCRETE_UCA:
            if self.generator is None:
                raise DomainError("discrete-uca source needs a UCA generator")
            object.__setattr__(self, "position", tuple(float(c) for c in self.generator.position))
        if not self.position[2] < 0:
            raise DomainError("source must lie strictly on the z < 0 side")


def _modes(mode):
    if isinstance(mode, (int, np.integer)):
        return (int(mode),)
    return tuple(int(m) for m in mode)


def incident_field_on_surface(source: SourceModel, mode, geometry: MetasurfaceGeometry,
                              constants=None) -> np.ndarray:
    """Incident field at each unit center.

    ``mode`` may be a single charge or a sequence of charges; several modes
    radiate coherently and their fields add.
    """
    constants = constants or SimulationConstants()
    u = geometry.positions()
    total = np.zeros(geometry.shape, dtype=complex)
    for l in _modes(mode):
        if source.kind == ANALYTIC:
            total = total + reference_wave(u, source.position, l, source.amplitudes.ref(l), constants)
        else:
            total = total + uca_incident_field(u, source.generator, l, constants)
    return total


def transmit_through(incident, pattern) -> np.ndarray:
    incident = np.asarray(incident)
    if incident.shape != pattern.geometry.shape:
        raise ShapeMismatchError(
            f"incident field shape {incident.shape} != pattern shape {pattern.geometry.shape}"
        )
    gain = 10.0 ** (-pattern.insertion_loss_db / 20.0)
    return incident * np.exp(1j * pattern.phase) * gain


def _field_chunk(points, units, weights, k):
    d = np.sqrt(((points[:, None, :] - units[None, :, :]) ** 2).sum(axis=-1))
    if np.any(d == 0):
        raise SingularityError("observation point coincides with a unit center")
    terms = weights[None, :] * np.exp(-1j * k * d) / (4 * math.pi * d)
    return terms.sum(axis=1)


def field_at(points, transmitted, geometry: MetasurfaceGeometry, constants=None,
             workers: int = 1) -> np.ndarray:
    """Superpose the spherical re-radiation of every unit at ``points``.

    ``points`` is a single 3-vector or an array of shape (..., 3); the result
    has the leading shape of ``points``.
    """
    constants = constants or SimulationConstants()
    transmitted = np.asarray(transmitted)
    if transmitted.shape != geometry.shape:
        raise ShapeMismatchError(f"transmitted shape {transmitted.shape} != {geometry.shape}")
    pts = np.asarray(points, dtype=float)
    lead = pts.shape[:-1]
    flat = np.ascontiguousarray(pts.reshape(-1, 3))
    if np.any(flat[:, 2] <= 0):
        raise DomainError("observation points must lie at z > 0")
    units = np.ascontiguousarray(geometry.positions().reshape(-1, 3))
    weights = np.ascontiguousarray(transmitted.reshape(-1))
    k = constants.wavenumber
    starts = range(0, len(flat), _CHUNK)

    def work(s):
        return _field_chunk(flat[s:s + _CHUNK], units, weights, k)

    if workers > 1 and len(flat) > _CHUNK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    out = np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
    return out.reshape(lead)


# -- scans ------------------------------------------------------------------

_AXES = {"xz": (0, 2, 1), "xy": (0, 1, 2), "yz": (1, 2, 0)}


@dataclass(frozen=True)
class ScanPlane:
    """Axis-aligned observation plane.

    ``plane`` names the two swept axes (first one varies along ``u``), and
    ``fixed`` is the value of the remaining coordinate.
    """

    plane: str = "xz"
    fixed: float = 0.0
    u_range: tuple = (-0.3, 0.3)
    v_range: tuple = (0.05, 0.8)
    resolution: tuple = (201, 251)

    def __post_init__(self):
        if self.plane not in _AXES:
            raise DomainError(f"plane must be one of {sorted(_AXES)}, got {self.plane!r}")
        for name, (lo, hi) in (("u_range", self.u_range), ("v_range", self.v_range)):
            if not hi > lo:
                raise DomainError(f"{name} must be non-degenerate, got {(lo, hi)}")
        if min(self.resolution) < 2:
            raise DomainError("resolution must be >= 2 per axis")
        iu, iv, ifix = _AXES[self.plane]
        lows = {iu: self.u_range[0], iv: self.v_range[0], ifix: self.fixed}
        if not lows[2] > 0:
            raise DomainError("scan plane must lie entirely at z > 0")

    @property
    def axis_names(self):
        iu, iv, _ = _AXES[self.plane]
        return "xyz"[iu], "xyz"[iv]

    def u(self) -> np.ndarray:
        return np.linspace(self.u_range[0], self.u_range[1], self.resolution[0])

    def v(self) -> np.ndarray:
        return np.linspace(self.v_range[0], self.v_range[1], self.resolution[1])

    def points(self) -> np.ndarray:
        """Sample positions, shape (nu, nv, 3)."""
        iu, iv, ifix = _AXES[self.plane]
        uu, vv = np.meshgrid(self.u(), self.v(), indexing="ij")
        pts = np.empty(uu.shape + (3,))
        pts[..., iu] = uu
        pts[..., iv] = vv
        pts[..., ifix] = self.fixed
        return pts

    def to_point(self, u: float, v: float) -> np.ndarray:
        iu, iv, ifix = _AXES[self.plane]
        p = np.empty(3)
        p[iu], p[iv], p[ifix] = u, v, self.fixed
        return p


@dataclass(frozen=True, eq=False)
class FieldMap:
    plane: ScanPlane
    samples: np.ndarray

    def __post_init__(self):
        if self.samples.shape != tuple(self.plane.resolution):
            raise ShapeMismatchError(
                f"samples shape {self.samples.shape} != resolution {tuple(self.plane.resolution)}"
            )

    @property
    def power_db(self) -> np.ndarray:
        """Power relative to the map peak; the peak is exactly 0 dB."""
        p = np.abs(self.samples) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            return 10.0 * np.log10(p / p.max())


def scan_plane(plane: ScanPlane, transmitted, geometry, constants=None, workers=1) -> FieldMap:
    return FieldMap(plane, field_at(plane.points(), transmitted, geometry, constants, workers))


@dataclass(frozen=True)
class FocalSpot:
    position: tuple
    peak_power_db: float
    extent_3db: tuple


def _parabolic_offset(a, b, c):
    den = a - 2 * b + c
    if den >= 0 or not np.isfinite(den):
        return 0.0
    return float(np.clip(0.5 * (a - c) / den, -0.5, 0.5))


def _half_width(profile, i, step, level):
    """Distance from sample ``i`` to where ``profile`` first drops below ``level``."""
    out = []
    for direction in (-1, 1):
        j = i
        while 0 <= j + direction < len(profile) and profile[j + direction] >= level:
            j += direction
        if 0 <= j + direction < len(profile):
            a, b = profile[j], profile[j + direction]
            frac = (a - level) / (a - b) if a != b else 0.0
            out.append((abs(j - i) + frac) * step)
        else:
            out.append((abs(j - i) + 0.5) * step)
    return out[0] + out[1]


def find_focal_spots(fmap: FieldMap, floor_db: float = -15.0,
                     min_separation: float = 0.015) -> list:
    """Local power maxima above ``floor_db`` (relative to the map peak).

    Maxima closer than ``min_separation`` along both axes are merged into the
    stronger one.  Positions are refined per axis by a three-point parabola on
    the dB map; ``extent_3db`` is the -3 dB full width along each axis.
    """
    if not floor_db < 0:
        raise DomainError("floor_db must be negative")
    pw = fmap.power_db
    if pw.size == 0 or not np.any(np.isfinite(pw)):
        raise DomainError("empty field map")
    plane = fmap.plane
    us, vs = plane.u(), plane.v()
    du, dv = us[1] - us[0], vs[1] - vs[0]
    ru = max(1, int(round(min_separation / du)))
    rv = max(1, int(round(min_separation / dv)))
    padded = np.pad(np.nan_to_num(pw, neginf=-np.inf), ((ru, ru), (rv, rv)), constant_values=-np.inf)
    wmax = sliding_window_view(padded, (2 * ru + 1, 2 * rv + 1)).max(axis=(-2, -1))
    cand = np.argwhere((pw >= wmax) & (pw > floor_db))
    order = sorted(range(len(cand)), key=lambda c: (-pw[tuple(cand[c])], tuple(cand[c])))
    accepted = []
    for c in order:
        i, j = cand[c]
        if any(abs(i - a) <= ru and abs(j - b) <= rv for a, b in accepted):
            continue
        accepted.append((int(i), int(j)))

    spots = []
    for i, j in accepted:
        oi = _parabolic_offset(pw[i - 1, j], pw[i, j], pw[i + 1, j]) if 0 < i < len(us) - 1 else 0.0
        oj = _parabolic_offset(pw[i, j - 1], pw[i, j], pw[i, j + 1]) if 0 < j < len(vs) - 1 else 0.0
        pos = plane.to_point(us[i] + oi * du, vs[j] + oj * dv)
        level = pw[i, j] - 3.0
        ext = (_half_width(pw[:, j], i, du, level), _half_width(pw[i, :], j, dv, level))
        spots.append(FocalSpot(tuple(float(c) for c in pos), float(pw[i, j]),
                               tuple(float(e) for e in ext)))
    return spots


# -- crosstalk --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CrosstalkMatrix:
    """Complex focal gains ``gains[i][p]``: field at receiver p with mode i alone."""

    modes: tuple
    receivers: tuple
    assigned: tuple
    gains: np.ndarray

    @property
    def power_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.gains))

    @property
    def isolation_db(self) -> np.ndarray:
        pw = self.power_db
        out = []
        for p, mode in enumerate(self.assigned):
            i = self.modes.index(mode)
            others = [pw[q, p] for q in range(len(self.modes)) if q != i]
            out.append(pw[i, p] - max(others))
        return np.array(out)

    def channel_matrix(self) -> np.ndarray:
        """H[p][q]: gain from the stream on mode q to receiver p."""
        cols = [self.modes.index(m) for m in self.assigned]
        return self.gains[cols, :].T.copy()


def crosstalk_matrix(source: SourceModel, pattern, geometry=None, constants=None,
                     targets=None, workers=1) -> CrosstalkMatrix:
    geometry = geometry or pattern.geometry
    targets = tuple(targets if targets is not None else pattern.targets)
    if len(targets) < 2:
        raise DomainError("crosstalk needs at least two (mode, target) assignments")
    points = np.array([t.position for t in targets], dtype=float)
    if len({tuple(p) for p in points.tolist()}) < len(points):
        warnings.warn("receivers share a position; isolation is degenerate", stacklevel=2)
    modes = tuple(t.mode for t in targets)
    gains = np.empty((len(modes), len(targets)), dtype=complex)
    for i, l in enumerate(modes):
        tx = transmit_through(incident_field_on_surface(source, l, geometry, constants), pattern)
        gains[i] = field_at(points, tx, geometry, constants, workers)
    return CrosstalkMatrix(modes, tuple(t.index for t in targets), modes, gains)


def illuminate(source, modes, pattern, constants=None) -> np.ndarray:
    """Transmitted per-unit field for the given active mode(s)."""
    inc = incident_field_on_surface(source, modes, pattern.geometry, constants)
    return transmit_through(inc, pattern)


__all__ = [
    "ANALYTIC", "DISCRETE_UCA", "SourceModel", "ScanPlane", "FieldMap", "FocalSpot",
    "CrosstalkMatrix", "incident_field_on_surface", "transmit_through", "field_at",
    "scan_plane", "find_focal_spots", "crosstalk_matrix", "illuminate",
]
