"""Turn a ScenarioConfig into domain objects and run the pipeline stages."""
from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np

from .errors import ConfigError, DomainError, SamplingError
from .hologram import (
    BesselMaskConfig,
    MetasurfaceGeometry,
    ReceiverTarget,
    quantize_phase,
    synthesize_pattern,
    vector_sum,
)
from .link import LinkConfig
from .propagation import (
    ANALYTIC,
    ScanPlane,
    SourceModel,
    crosstalk_matrix,
    find_focal_spots,
    illuminate,
    scan_plane,
)
from .waves import SimulationConstants, SourceAmplitudes, UcaGenerator, UcaRing, uca_radius


@contextmanager
def _field(name):
    try:
        yield
    except ConfigError:
        raise
    except (DomainError, SamplingError) as exc:
        raise ConfigError(str(exc), name) from None


class Scenario:
    def __init__(self, cfg):
        self.config = cfg
        with _field("frequency"):
            self.constants = SimulationConstants(cfg.frequency)
        with _field("surface"):
            s = cfg.surface
            self.geometry = MetasurfaceGeometry(s.rows, s.cols, s.period)
        targets = []
        for i, a in enumerate(cfg.assignments):
            with _field(f"assignments[{i}]"):
                targets.append(ReceiverTarget(i, a.target, a.mode))
        self.targets = tuple(targets)
        self.amplitudes = SourceAmplitudes(
            beta_ref=dict(cfg.source.beta_ref),
            beta_obj={i: a.beta_obj for i, a in enumerate(cfg.assignments)},
        )
        with _field("mask.alpha_deg"):
            self.mask = BesselMaskConfig(math.radians(cfg.mask.alpha_deg))
        with _field("source"):
            self.source = self._build_source(cfg)
        with _field("scan"):
            sc = cfg.scan
            self.plane = ScanPlane(sc.plane, sc.fixed, sc.u_range, sc.v_range, sc.resolution)
        self._pattern = None

    def _build_source(self, cfg):
        src = cfg.source
        if src.kind == ANALYTIC:
            return SourceModel(ANALYTIC, src.position, self.amplitudes)
        theta = math.radians(src.divergence_deg)
        rings = []
        for l in self.modes:
            radius = uca_radius(l, self.constants, theta)
            with _field("source.elements_per_ring"):
                rings.append(UcaRing(l, src.elements_per_ring, radius, src.position,
                                     src.element_amplitude))
        return SourceModel("discrete-uca", src.position, self.amplitudes, UcaGenerator(tuple(rings)))

    @property
    def modes(self) -> tuple:
        return tuple(t.mode for t in self.targets)

    def design(self):
        if self._pattern is None:
            h = self.config.hologram
            self._pattern = synthesize_pattern(
                self.geometry, self.targets, self.source.position, self.amplitudes,
                self.mask, self.constants, h.converging, h.normalize_amplitude,
            )
        return self._pattern

    def near_degenerate_units(self, rel=1e-6):
        """Units whose vector-sum magnitude is tiny compared with the median."""
        h = self.config.hologram
        total = np.abs(vector_sum(self.geometry, self.targets, self.source.position,
                                  self.amplitudes, self.mask, self.constants,
                                  h.converging, h.normalize_amplitude))
        return [tuple(int(i) for i in u) for u in np.argwhere(total < rel * np.median(total))]

    def quantize(self, pattern=None):
        q = self.config.quantization
        return quantize_phase(pattern if pattern is not None else self.design(),
                              q.levels, q.insertion_loss_db)

    def transmitted(self, pattern, modes=None):
        return illuminate(self.source, self.modes if modes is None else modes, pattern,
                          self.constants)

    def scan(self, pattern, modes=None, workers=1):
        return scan_plane(self.plane, self.transmitted(pattern, modes), self.geometry,
                          self.constants, workers)

    def spots(self, fmap):
        return find_focal_spots(fmap, self.config.scan.floor_db, self.config.scan.min_separation)

    def crosstalk(self, pattern, workers=1):
        return crosstalk_matrix(self.source, pattern, self.geometry, self.constants,
                                self.targets, workers)

    def link_config(self, channel) -> LinkConfig:
        ln = self.config.link
        return LinkConfig(np.asarray(channel, dtype=complex), ln.seed, ln.batch_symbols,
                          ln.min_errors, ln.max_bits, ln.constellation_cap)
