"""Physical constants, Bessel functions and vortex-wave source models.

Time convention: a wave travelling outward from a point source has the
spatial dependence ``exp(-1j * k * r)``.  Every field in the package uses it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SamplingError, SingularityError

SPEED_OF_LIGHT = 299_792_458.0
TWO_PI = 2.0 * math.pi
MAX_MODE = 8

_BESSEL_MAX_ORDER = 20
_BESSEL_MAX_ARG = 100.0
_SERIES_LIMIT = 8.0


@dataclass(frozen=True)
class SimulationConstants:
    frequency: float = 10e9

    def __post_init__(self):
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise DomainError(f"frequency must be positive, got {self.frequency!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength


def check_mode(l: int) -> int:
    """Validate a topological charge and return it as a plain int."""
    if int(l) != l:
        raise DomainError(f"mode must be an integer, got {l!r}")
    l = int(l)
    if abs(l) > MAX_MODE:
        raise DomainError(f"|l| must be <= {MAX_MODE}, got {l}")
    return l


def azimuth(x, y):
    """Four-quadrant azimuth in (-pi, pi]."""
    return np.arctan2(y, x)


# -- Bessel functions -------------------------------------------------------

def _bessel_series(n: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term.copy()
    q = half * half
    for k in range(1, 60):
        term = -term * q / (k * (k + n))
        total += term
        if np.all(np.abs(term) < 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _bessel_miller(n: int, x: np.ndarray) -> np.ndarray:
    # Backward recurrence normalised by J0 + 2*sum(J_2k) = 1.
    top = max(float(n), float(np.max(x)))
    m = 2 * ((int(top) + 20 + int(math.sqrt(60.0 * top))) // 2)
    tox = 2.0 / x
    bjp = np.zeros_like(x)
    bj = np.ones_like(x)
    ans = np.zeros_like(x)
    acc = np.zeros_like(x)
    add = False
    for j in range(m, 0, -1):
        bjm = j * tox * bj - bjp
        bjp, bj = bj, bjm
        big = np.abs(bj) > 1e10
        if np.any(big):
            scale = np.where(big, 1e-10, 1.0)
            bj, bjp, ans, acc = bj * scale, bjp * scale, ans * scale, acc * scale
        if add:
            acc = acc + bj
        add = not add
        if j == n:
            ans = bjp.copy()
    if n == 0:
        ans = bj
    norm = 2.0 * acc - bj
    return ans / norm


def bessel_j(order: int, x):
    """Bessel function of the first kind J_order(x).

    Ascending series for |x| <= 8, Miller's backward recurrence above that.
    Accepts a scalar or an array for ``x``; returns the same shape.
    """
    if int(order) != order or not 0 <= order <= _BESSEL_MAX_ORDER:
        raise DomainError(f"order must be an integer in [0, {_BESSEL_MAX_ORDER}], got {order!r}")
    n = int(order)
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)) or np.any(np.abs(xa) > _BESSEL_MAX_ARG):
        raise DomainError(f"|x| must be <= {_BESSEL_MAX_ARG}")
    ax = np.abs(np.atleast_1d(xa))
    out = np.empty_like(ax)
    small = ax <= _SERIES_LIMIT
    if np.any(small):
        out[small] = _bessel_series(n, ax[small])
    if np.any(~small):
        out[~small] = _bessel_miller(n, ax[~small])
    if n % 2:
        out = np.where(np.atleast_1d(xa) < 0, -out, out)
    if xa.ndim == 0:
        return float(out[0])
    return out.reshape(xa.shape)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bessel_first_max(order: int, tol: float = 1e-10) -> float:
    """Abscissa of the first maximum of J_order, by golden-section search."""
    if int(order) != order or not 1 <= order <= MAX_MODE:
        raise DomainError(f"order must be an integer in [1, {MAX_MODE}], got {order!r}")
    # J_l is unimodal on (0, l + 3): its first maximum lies below and its
    # first zero above that bound for every l in 1..8.
    a, b = 0.0, float(order) + 3.0
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = bessel_j(order, c), bessel_j(order, d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = bessel_j(order, c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = bessel_j(order, d)
    return 0.5 * (a + b)


# -- UCA generator ----------------------------------------------------------

def uca_radius(mode: int, constants: SimulationConstants, divergence: float) -> float:
    """Ring radius that puts the mode's intensity maximum at ``divergence`` (rad)."""
    l = check_mode(mode)
    if l == 0:
        raise DomainError("ring radius is undefined for l = 0")
    if not 0.0 < divergence < math.pi / 2:
        raise DomainError(f"divergence angle must lie in (0, pi/2), got {divergence!r}")
    return bessel_first_max(abs(l)) / (constants.wavenumber * math.sin(divergence))


def uca_element_phases(mode: int, num_elements: int) -> np.ndarray:
    """Feed phases -l*2*pi*i/N, wrapped to [0, 2*pi)."""
    l = check_mode(mode)
    if num_elements < 2 * abs(l) + 1:
        raise SamplingError(f"N={num_elements} elements cannot carry l={l} (need N >= {2 * abs(l) + 1})")
    i = np.arange(num_elements)
    return np.mod(-l * TWO_PI * i / num_elements, TWO_PI)


@dataclass(frozen=True)
class UcaRing:
    mode: int
    num_elements: int
    radius: float
    center: tuple = (0.0, 0.0, -0.5)
    element_amplitude: complex = 1.0

    def __post_init__(self):
        check_mode(self.mode)
        if self.num_elements < 2 * abs(self.mode) + 1:
            raise SamplingError(
                f"N={self.num_elements} elements cannot carry l={self.mode}"
            )
        if not self.radius > 0:
            raise DomainError(f"ring radius must be positive, got {self.radius!r}")

    def element_positions(self) -> np.ndarray:
        ang = TWO_PI * np.arange(self.num_elements) / self.num_elements
        cx, cy, cz = self.center
        return np.stack(
            [cx + self.radius * np.cos(ang), cy + self.radius * np.sin(ang),
             np.full(self.num_elements, float(cz))],
            axis=-1,
        )

    def element_phases(self) -> np.ndarray:
        return uca_element_phases(self.mode, self.num_elements)


@dataclass(frozen=True)
class UcaGenerator:
    """Concentric rings sharing one phase center, one ring per mode."""

    rings: tuple

    def __post_init__(self):
        if not self.rings:
            raise DomainError("generator needs at least one ring")
        centers = {tuple(map(float, r.center)) for r in self.rings}
        if len(centers) != 1:
            raise DomainError("all rings must share the same center")
        modes = [r.mode for r in self.rings]
        if len(set(modes)) != len(modes):
            raise DomainError(f"ring modes must be distinct, got {modes}")

    @property
    def position(self) -> np.ndarray:
        return np.asarray(self.rings[0].center, dtype=float)

    def ring(self, mode: int) -> UcaRing:
        for r in self.rings:
            if r.mode == mode:
                return r
        raise DomainError(f"generator has no ring for mode {mode}")

    @classmethod
    def nested(cls, modes, constants, divergence=math.radians(30.0),
               num_elements=8, position=(0.0, 0.0, -0.5)):
        """Build rings sized by the divergence-matching rule for each mode."""
        rings = tuple(
            UcaRing(mode=l, num_elements=num_elements,
                    radius=uca_radius(l, constants, divergence),
                    center=tuple(float(c) for c in position))
            for l in modes
        )
        return cls(rings)


@dataclass(frozen=True)
class SourceAmplitudes:
    """Complex transmission parameters; anything not listed defaults to 1."""

    beta_ref: dict = field(default_factory=dict)
    beta_obj: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, table in (("beta_ref", self.beta_ref), ("beta_obj", self.beta_obj)):
            for key, v in table.items():
                if not abs(v) > 0:
                    raise DomainError(f"{name}[{key}] must have positive magnitude")

    def ref(self, mode: int) -> complex:
        return complex(self.beta_ref.get(mode, 1.0))

    def obj(self, receiver) -> complex:
        return complex(self.beta_obj.get(receiver, 1.0))


# -- fields -----------------------------------------------------------------

def reference_wave(unit_pos, source_pos, mode, beta_ref=1.0, constants=None):
    """Spherical vortex wave of charge ``mode`` arriving at ``unit_pos``.

    ``unit_pos`` may be a single point or an array of shape (..., 3).
    """
    constants = constants or SimulationConstants()
    l = check_mode(mode)
    u = np.asarray(unit_pos, dtype=float)
    r = np.linalg.norm(u - np.asarray(source_pos, dtype=float), axis=-1)
    if np.any(r == 0):
        raise SingularityError("reference wave evaluated at the source position")
    if l != 0 and np.any((u[..., 0] == 0) & (u[..., 1] == 0)):
        raise SingularityError("vortex phase undefined on the z-axis")
    phi = azimuth(u[..., 0], u[..., 1])
    return beta_ref * np.exp(-1j * constants.wavenumber * r - 1j * l * phi) / (4 * math.pi * r)


def uca_incident_field(point, generator: UcaGenerator, mode: int, constants=None):
    """Coherent sum of the point radiators of the ring carrying ``mode``."""
    constants = constants or SimulationConstants()
    ring = generator.ring(mode)
    p = np.asarray(point, dtype=float)
    elems = ring.element_positions()
    d = np.linalg.norm(p[..., None, :] - elems, axis=-1)
    if np.any(d == 0):
        raise SingularityError("field evaluated at a UCA element position")
    weights = ring.element_amplitude * np.exp(1j * ring.element_phases())
    terms = weights * np.exp(-1j * constants.wavenumber * d) / (4 * math.pi * d)
    return terms.sum(axis=-1)
