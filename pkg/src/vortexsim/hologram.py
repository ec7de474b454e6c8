"""Holographic synthesis of metasurface transmission phases.

Each unit records the ratio of an object wave (a spherical wave tied to one
receiver) to the vortex reference wave that illuminates it.  Patterns for
several (mode, receiver) pairs are combined as the argument of their vector
sum and can then be quantized to the discrete states of the hardware.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSumError, DomainError, SingularityError
from .waves import (
    TWO_PI,
    SimulationConstants,
    SourceAmplitudes,
    azimuth,
    check_mode,
)

DEGENERATE_THRESHOLD = 1e-15


@dataclass(frozen=True)
class MetasurfaceGeometry:
    rows: int = 28
    cols: int = 28
    period: float = 0.015

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DomainError("metasurface needs at least one row and one column")
        if not self.period > 0:
            raise DomainError(f"period must be positive, got {self.period!r}")

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def unit_position(self, m: int, n: int) -> np.ndarray:
        return np.array([
            (n - (self.cols - 1) / 2) * self.period,
            (m - (self.rows - 1) / 2) * self.period,
            0.0,
        ])

    def positions(self) -> np.ndarray:
        """Unit centers as an array of shape (rows, cols, 3)."""
        x = (np.arange(self.cols) - (self.cols - 1) / 2) * self.period
        y = (np.arange(self.rows) - (self.rows - 1) / 2) * self.period
        xx, yy = np.meshgrid(x, y)
        return np.stack([xx, yy, np.zeros_like(xx)], axis=-1)


@dataclass(frozen=True)
class ReceiverTarget:
    index: int
    position: tuple
    mode: int

    def __post_init__(self):
        check_mode(self.mode)
        if len(self.position) != 3:
            raise DomainError("target position must have three coordinates")
        if not self.position[2] > 0:
            raise DomainError(f"target {self.index} must lie at z > 0, got z={self.position[2]!r}")


@dataclass(frozen=True)
class BesselMaskConfig:
    """Axicon-like radial phase; ``alpha`` is the cone angle in radians."""

    alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha < math.pi / 2:
            raise DomainError(f"mask angle must lie in [0, pi/2), got {self.alpha!r}")

    @classmethod
    def from_wavevector(cls, k_rho: float, k_z: float) -> "BesselMaskConfig":
        return cls(math.atan2(k_rho, k_z))


@dataclass(frozen=True, eq=False)
class PhasePattern:
    geometry: MetasurfaceGeometry
    phase: np.ndarray
    targets: tuple = ()
    mask: BesselMaskConfig = field(default_factory=BesselMaskConfig)

    def __post_init__(self):
        ph = np.asarray(self.phase, dtype=float)
        if ph.shape != self.geometry.shape:
            raise DomainError(f"phase array shape {ph.shape} != geometry {self.geometry.shape}")
        if not np.all(np.isfinite(ph)):
            raise DomainError("phase pattern contains non-finite values")
        wrapped = np.mod(ph, TWO_PI)
        # mod of a tiny negative number rounds up to exactly 2*pi
        wrapped[wrapped >= TWO_PI] = 0.0
        object.__setattr__(self, "phase", wrapped)

    @property
    def insertion_loss_db(self) -> float:
        return 0.0


@dataclass(frozen=True, eq=False)
class QuantizedPattern:
    geometry: MetasurfaceGeometry
    states: np.ndarray
    levels: int = 4
    insertion_loss_db: float = 0.0
    targets: tuple = ()
    mask: BesselMaskConfig = field(default_factory=BesselMaskConfig)

    def __post_init__(self):
        if self.levels < 2:
            raise DomainError(f"need at least 2 levels, got {self.levels}")
        if not self.insertion_loss_db >= 0:
            raise DomainError("insertion loss must be >= 0 dB")
        st = np.asarray(self.states)
        if st.shape != self.geometry.shape:
            raise DomainError(f"state array shape {st.shape} != geometry {self.geometry.shape}")
        if np.any((st < 0) | (st >= self.levels)):
            raise DomainError(f"states must lie in [0, {self.levels})")
        object.__setattr__(self, "states", st.astype(np.int64))

    @property
    def phase(self) -> np.ndarray:
        return TWO_PI * self.states / self.levels

    def as_phase_pattern(self) -> PhasePattern:
        return PhasePattern(self.geometry, self.phase, self.targets, self.mask)


def _target_pos(target) -> np.ndarray:
    if isinstance(target, ReceiverTarget):
        return np.asarray(target.position, dtype=float)
    return np.asarray(target, dtype=float)


def path_excess(unit_pos, target):
    """Distance from unit to receiver minus the receiver's depth z_p."""
    t = _target_pos(target)
    r = np.linalg.norm(np.asarray(unit_pos, dtype=float) - t, axis=-1)
    return r - t[2]


def object_wave(unit_pos, target, beta_obj=1.0, constants=None, converging=True):
    """Object wave for one receiver at the given unit(s).

    With ``converging=False`` the phase is ``-k * path_excess``, the wave
    that appears to diverge from the receiver.  Under the outgoing
    ``exp(-jkr)`` convention that reconstructs a virtual focus behind the
    surface; the default uses the conjugate phase ``+k * path_excess``,
    whose re-radiation converges on the receiver.
    """
    constants = constants or SimulationConstants()
    t = _target_pos(target)
    u = np.asarray(unit_pos, dtype=float)
    r = np.linalg.norm(u - t, axis=-1)
    if np.any(r == 0):
        raise SingularityError("object wave evaluated at the receiver position")
    sign = 1.0 if converging else -1.0
    dd = r - t[2]
    return beta_obj * np.exp(sign * 1j * constants.wavenumber * dd) / (4 * math.pi * r)


def single_mode_pattern(unit_pos, source_pos, mode, target, amplitudes=None,
                        constants=None, converging=True, normalize=False):
    """Hologram T = W_obj / W_ref recorded by each unit for one mode.

    Computed in closed form; ``normalize`` drops the amplitude ratio and
    keeps only the unit phasor.
    """
    constants = constants or SimulationConstants()
    amplitudes = amplitudes or SourceAmplitudes()
    l = check_mode(mode)
    u = np.asarray(unit_pos, dtype=float)
    t = _target_pos(target)
    r_t = np.linalg.norm(u - np.asarray(source_pos, dtype=float), axis=-1)
    r_r = np.linalg.norm(u - t, axis=-1)
    if np.any(r_t == 0) or np.any(r_r == 0):
        raise SingularityError("unit coincides with the source or the receiver")
    if l != 0 and np.any((u[..., 0] == 0) & (u[..., 1] == 0)):
        raise SingularityError("vortex phase undefined on the z-axis")
    receiver = target.index if isinstance(target, ReceiverTarget) else 0
    k = constants.wavenumber
    sign = 1.0 if converging else -1.0
    dd = r_r - t[2]
    phase = k * r_t + sign * k * dd + l * azimuth(u[..., 0], u[..., 1])
    if normalize:
        ratio = amplitudes.obj(receiver) / amplitudes.ref(l)
        return (ratio / abs(ratio)) * np.exp(1j * phase)
    mag = amplitudes.obj(receiver) * r_t / (amplitudes.ref(l) * r_r)
    return mag * np.exp(1j * phase)


def bessel_mask_phase(unit_pos, mask: BesselMaskConfig, constants=None):
    constants = constants or SimulationConstants()
    u = np.asarray(unit_pos, dtype=float)
    rho = np.hypot(u[..., 0], u[..., 1])
    return constants.wavenumber * rho * math.sin(mask.alpha)


def vector_sum(geometry, targets, source_pos, amplitudes=None, mask=None,
               constants=None, converging=True, normalize=True):
    """Complex sum of the masked single-mode holograms at every unit."""
    mask = mask or BesselMaskConfig()
    targets = tuple(targets)
    if not targets:
        raise DomainError("at least one (mode, target) assignment is required")
    modes = [t.mode for t in targets]
    if len(set(modes)) != len(modes):
        raise DomainError(f"assigned modes must be distinct, got {modes}")
    u = geometry.positions()
    total = np.zeros(geometry.shape, dtype=complex)
    for t in targets:
        total = total + single_mode_pattern(u, source_pos, t.mode, t, amplitudes,
                                            constants, converging, normalize)
    return total * np.exp(1j * bessel_mask_phase(u, mask, constants))


def synthesize_pattern(geometry, targets, source_pos, amplitudes=None, mask=None,
                       constants=None, converging=True, normalize=True) -> PhasePattern:
    mask = mask or BesselMaskConfig()
    total = vector_sum(geometry, targets, source_pos, amplitudes, mask, constants,
                       converging, normalize)
    bad = np.argwhere(np.abs(total) < DEGENERATE_THRESHOLD)
    if len(bad):
        raise DegenerateSumError(bad)
    return PhasePattern(geometry, np.mod(np.angle(total), TWO_PI), tuple(targets), mask)


def quantize_phase(pattern, levels: int = 4, insertion_loss_db: float = 0.0) -> QuantizedPattern:
    """Snap each phase to the nearest of ``levels`` uniform states.

    Exact ties go to the lower state index.
    """
    if levels < 2:
        raise DomainError(f"need at least 2 levels, got {levels}")
    v = np.asarray(pattern.phase, dtype=float) * levels / TWO_PI
    states = np.mod(np.ceil(v - 0.5), levels).astype(np.int64)
    return QuantizedPattern(pattern.geometry, states, levels, float(insertion_loss_db),
                            pattern.targets, pattern.mask)
