"""Two-stream QPSK link over the focal-point channel.

Randomness
----------
All draws come from the raw 64-bit output of a Philox4x64-10 counter-based
generator keyed by the word pair ``(seed, point_index)``.  Block ``i`` (for
i = 1, 2, ...) is the cipher applied to the counter ``(i, 0, 0, 0)``; its four
output words are consumed in order.  From each raw word ``w``:

* bits: the 64 bits of ``w``, least significant first;
* uniforms: ``((w >> 11) + 0.5) * 2**-53``, which lies strictly in (0, 1);
* Gaussian pairs: Box-Muller on two consecutive uniforms ``u1, u2``:
  ``r = sqrt(-2 ln u1)``, ``(r cos 2 pi u2, r sin 2 pi u2)``.

Within one SNR point each batch draws, in order, the payload bits for every
stream, then the complex noise for every receiver.

SNR is Es/N0 per receiver, Es = |h_pp|^2 for unit-energy symbols; for QPSK
Eb/N0 = Es/N0 - 10 log10(2).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeMismatchError

_SQRT_HALF = math.sqrt(0.5)


def q_function(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def ebn0_to_esn0_db(ebn0_db):
    return ebn0_db + 10.0 * math.log10(2.0)


def qpsk_reference_ber(esn0_db):
    """Interference-free QPSK bit error rate Q(sqrt(2 Eb/N0)) = Q(sqrt(Es/N0))."""
    return q_function(math.sqrt(10.0 ** (esn0_db / 10.0)))


def qpsk_modulate(bits) -> np.ndarray:
    """Gray-mapped unit-energy QPSK: first bit sets the imaginary sign, second the real sign."""
    b = np.asarray(bits, dtype=np.int64).reshape(-1)
    if b.size % 2:
        raise DomainError("QPSK needs an even number of bits")
    pairs = b.reshape(-1, 2)
    return ((1 - 2 * pairs[:, 1]) + 1j * (1 - 2 * pairs[:, 0])) * _SQRT_HALF


def qpsk_demodulate(symbols) -> np.ndarray:
    s = np.asarray(symbols, dtype=complex).reshape(-1)
    out = np.empty((s.size, 2), dtype=np.int64)
    out[:, 0] = s.imag < 0
    out[:, 1] = s.real < 0
    return out.reshape(-1)


class PortableRng:
    """Philox4x64-10 stream with explicitly defined bit, uniform and normal draws."""

    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= seed < 2**64 or not 0 <= stream < 2**64:
            raise DomainError("seed and stream index must be 64-bit unsigned integers")
        self._gen = np.random.Philox(key=(int(stream) << 64) | int(seed))

    def raw(self, n: int) -> np.ndarray:
        return self._gen.random_raw(n)

    def bits(self, n: int) -> np.ndarray:
        words = self.raw((n + 63) // 64)
        b = np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")
        return b[:n].astype(np.int64)

    def uniforms(self, n: int) -> np.ndarray:
        return ((self.raw(n) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def complex_normal(self, n: int, variance: float = 1.0) -> np.ndarray:
        """Circular Gaussian samples with ``variance`` per real dimension."""
        u = self.uniforms(2 * n).reshape(n, 2)
        r = np.sqrt(-2.0 * np.log(u[:, 0]))
        ang = 2.0 * math.pi * u[:, 1]
        return math.sqrt(variance) * r * (np.cos(ang) + 1j * np.sin(ang))


def apply_channel(tx, channel, sigma2, rng: PortableRng | None) -> np.ndarray:
    """y_p = sum_q h[p][q] x_q + n_p for every receiver p.

    ``tx`` has shape (S, K); ``sigma2`` is a scalar or one value per receiver
    (variance per real dimension).
    """
    x = np.asarray(tx, dtype=complex)
    h = np.asarray(channel, dtype=complex)
    if x.ndim != 2 or h.shape != (x.shape[0], x.shape[0]):
        raise ShapeMismatchError(f"channel {h.shape} incompatible with {x.shape[0]} streams")
    y = np.empty_like(x)
    for p in range(h.shape[0]):
        acc = h[p, 0] * x[0]
        for q in range(1, h.shape[1]):
            acc = acc + h[p, q] * x[q]
        y[p] = acc
    s2 = np.broadcast_to(np.asarray(sigma2, dtype=float), (h.shape[0],))
    if np.any(s2 < 0):
        raise DomainError("noise variance must be >= 0")
    if np.any(s2 > 0):
        if rng is None:
            raise DomainError("a random stream is required when noise is present")
        for p in range(h.shape[0]):
            y[p] = y[p] + rng.complex_normal(x.shape[1], s2[p])
    return y


def estimate_sinr(channel, p: int, signal_power: float = 1.0, sigma2: float = 0.0) -> float:
    h = np.asarray(channel, dtype=complex)
    if not 0 <= p < h.shape[0]:
        raise DomainError(f"receiver index {p} out of range")
    num = abs(h[p, p]) ** 2 * signal_power
    den = sum(abs(h[p, q]) ** 2 for q in range(h.shape[1]) if q != p) * signal_power + 2 * sigma2
    if den == 0:
        if num == 0:
            raise DomainError("SINR undefined: no signal, interference or noise")
        return math.inf
    return num / den


@dataclass(frozen=True, eq=False)
class LinkConfig:
    channel: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    seed: int = 2025
    batch_symbols: int = 1 << 16
    min_errors: int = 100
    max_bits: int = 2_000_000
    constellation_cap: int = 2000

    def __post_init__(self):
        h = np.asarray(self.channel, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DomainError("channel matrix must be square")
        if np.any(np.diagonal(h) == 0):
            raise DomainError("direct gains h[p][p] must be non-zero")
        if self.batch_symbols < 1 or self.max_bits < 1:
            raise DomainError("symbol and bit budgets must be >= 1")
        object.__setattr__(self, "channel", h)

    @property
    def num_streams(self) -> int:
        return self.channel.shape[0]


@dataclass(frozen=True)
class BerPoint:
    stream: int
    snr_db: float
    bits: int
    errors: int

    @property
    def ber(self) -> float:
        return self.errors / self.bits


@dataclass(frozen=True)
class BerCurve:
    points: tuple
    snr_db: tuple

    @property
    def reference(self) -> tuple:
        return tuple(qpsk_reference_ber(s) for s in self.snr_db)

    def stream(self, s: int) -> list:
        return [p for p in self.points if p.stream == s]


@dataclass(frozen=True, eq=False)
class ConstellationDump:
    snr_db: float
    symbols: tuple  # one array per stream


def _run_point(cfg: LinkConfig, index: int, snr_db: float, keep: int):
    h = cfg.channel
    S = cfg.num_streams
    rng = PortableRng(cfg.seed, index)
    snr = 10.0 ** (snr_db / 10.0)
    sigma2 = np.abs(np.diagonal(h)) ** 2 / (2.0 * snr)
    errors = np.zeros(S, dtype=np.int64)
    bits_done = 0
    kept = [np.zeros(0, dtype=complex) for _ in range(S)]
    while True:
        k = cfg.batch_symbols
        payload = rng.bits(2 * k * S).reshape(S, 2 * k)
        tx = np.stack([qpsk_modulate(payload[s]) for s in range(S)])
        y = apply_channel(tx, h, sigma2, rng)
        eq = y / np.diagonal(h)[:, None]
        for s in range(S):
            errors[s] += int(np.count_nonzero(qpsk_demodulate(eq[s]) != payload[s]))
            if len(kept[s]) < keep:
                kept[s] = np.concatenate([kept[s], eq[s, :keep - len(kept[s])]])
        bits_done += 2 * k
        if errors.min() >= cfg.min_errors or bits_done >= cfg.max_bits:
            break
    return errors, bits_done, kept


def ber_sweep(cfg: LinkConfig, snr_grid_db, workers: int = 1):
    """Monte-Carlo BER per stream over an Es/N0 grid (dB).

    Each point simulates whole batches until every stream has at least
    ``min_errors`` errors or ``max_bits`` bits per stream have been sent.
    Receivers equalize by their own direct gain only.  The constellation
    dump holds equalized symbols from the highest-SNR point.
    """
    grid = [float(s) for s in snr_grid_db]
    if not grid:
        raise DomainError("SNR grid must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("SNR grid must be strictly increasing")
    last = len(grid) - 1

    def job(i):
        return _run_point(cfg, i, grid[i], cfg.constellation_cap if i == last else 0)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(len(grid))))
    else:
        results = [job(i) for i in range(len(grid))]
    points = []
    for s in range(cfg.num_streams):
        for i, (errors, bits, _) in enumerate(results):
            points.append(BerPoint(s, grid[i], bits, int(errors[s])))
    dump = ConstellationDump(grid[last], tuple(results[last][2]))
    return BerCurve(tuple(points), tuple(grid)), dump
