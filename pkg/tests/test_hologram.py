import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexsim.errors import DegenerateSumError, DomainError, SingularityError
from vortexsim.hologram import (
    BesselMaskConfig,
    MetasurfaceGeometry,
    PhasePattern,
    ReceiverTarget,
    bessel_mask_phase,
    object_wave,
    path_excess,
    quantize_phase,
    single_mode_pattern,
    synthesize_pattern,
    vector_sum,
)
from vortexsim.waves import SimulationConstants, SourceAmplitudes, reference_wave

C10 = SimulationConstants(10e9)
SRC = (0.0, 0.0, -0.5)
GEOM = MetasurfaceGeometry()
AXIAL = (ReceiverTarget(0, (0.0, 0.0, 0.3), 1), ReceiverTarget(1, (0.0, 0.0, 0.5), 2))


def wrapped_diff(a, b):
    return np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))


def test_geometry_layout():
    g = MetasurfaceGeometry(28, 28, 0.015)
    pos = g.positions()
    assert pos.shape == (28, 28, 3)
    assert np.allclose(g.unit_position(0, 0), (-13.5 * 0.015, -13.5 * 0.015, 0))
    assert np.allclose(pos[3, 7], g.unit_position(3, 7))
    assert not np.any((pos[..., 0] == 0) & (pos[..., 1] == 0))
    with pytest.raises(DomainError):
        MetasurfaceGeometry(28, 28, 0.0)


def test_target_must_be_in_front():
    with pytest.raises(DomainError):
        ReceiverTarget(0, (0, 0, -0.1), 1)


def test_path_excess_examples():
    assert path_excess((0, 0, 0), (0, 0, 0.4)) == 0.0
    exact = math.sqrt(0.21**2 + 0.4**2) - 0.4
    assert path_excess((0.21, 0, 0), (0, 0, 0.4)) == pytest.approx(exact, rel=1e-14)
    assert path_excess((0.21, 0, 0), (0, 0, 0.4)) == pytest.approx(0.051766, abs=1e-5)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 2))
def test_path_excess_nonnegative_on_axis(x, y, z):
    assert path_excess((x, y, 0.0), (0, 0, z)) >= 0.0


def test_object_wave_literal_examples():
    w = object_wave((0, 0, 0), (0, 0, 0.4), 1.0, C10, converging=False)
    assert abs(w) == pytest.approx(1 / (4 * math.pi * 0.4), rel=1e-12)
    assert np.angle(w) == pytest.approx(0.0, abs=1e-15)
    w = object_wave((0.21, 0, 0), (0, 0, 0.4), 1.0, C10, converging=False)
    expected = -(2 * math.pi / 0.0299792458) * (math.sqrt(0.2041) - 0.4)
    assert wrapped_diff(np.angle(w), expected) < 1e-12
    assert expected == pytest.approx(-10.848, abs=5e-3)


def test_object_wave_converging_is_conjugate_phase():
    u = GEOM.positions()
    a = object_wave(u, (0.05, 0, 0.4), 1.0, C10, converging=True)
    b = object_wave(u, (0.05, 0, 0.4), 1.0, C10, converging=False)
    assert np.allclose(a, np.conj(b))


def test_object_wave_phase_depends_on_excess_only():
    # Two units at the same radius around an on-axis target share the excess.
    t = (0, 0, 0.4)
    a = object_wave((0.1, 0.05, 0), t, 1.0, C10)
    b = object_wave((-0.05, -0.1, 0), t, 1.0, C10)
    assert np.angle(a) == pytest.approx(np.angle(b), abs=1e-12)


@pytest.mark.parametrize("converging", [True, False])
@pytest.mark.parametrize("t", AXIAL + (ReceiverTarget(0, (-0.15, 0, 0.4), 1), ReceiverTarget(1, (0.15, 0, 0.4), 2)))
def test_reconstruction_identity_all_units(t, converging):
    amps = SourceAmplitudes({1: 0.7 + 0.2j, 2: 1.3j}, {0: 0.5 - 0.5j, 1: 2.0})
    u = GEOM.positions()
    T = single_mode_pattern(u, SRC, t.mode, t, amps, C10, converging)
    w_ref = reference_wave(u, SRC, t.mode, amps.ref(t.mode), C10)
    w_obj = object_wave(u, t, amps.obj(t.index), C10, converging)
    assert np.max(np.abs(T * w_ref - w_obj) / np.abs(w_obj)) < 1e-12


def test_unit_magnitude_when_equidistant():
    # Unit on the plane z=0 equidistant from source and target at mirror depths.
    u = np.array([0.1, 0.07, 0.0])
    T = single_mode_pattern(u, (0, 0, -0.4), 1, ReceiverTarget(0, (0, 0, 0.4), 1), None, C10)
    assert abs(T) == pytest.approx(1.0, rel=1e-12)


def test_single_mode_azimuth_term():
    u = np.array([0.105, 0.105, 0.0])
    t = ReceiverTarget(0, (0, 0, 0.4), 1)
    T1 = single_mode_pattern(u, SRC, 1, t, None, C10, converging=False)
    T0 = single_mode_pattern(u, SRC, 0, t, None, C10, converging=False)
    assert np.angle(T1 / T0) == pytest.approx(math.pi / 4, abs=1e-12)


def test_bessel_mask_examples():
    u = GEOM.positions()
    assert np.all(bessel_mask_phase(u, BesselMaskConfig(0.0), C10) == 0)
    assert bessel_mask_phase(np.zeros(3), BesselMaskConfig(0.5), C10) == 0
    val = bessel_mask_phase(np.array([0.21, 0, 0]), BesselMaskConfig(math.radians(10)), C10)
    assert val == pytest.approx(7.642, abs=1e-3)
    m = BesselMaskConfig.from_wavevector(1.0, math.sqrt(3.0))
    assert m.alpha == pytest.approx(math.pi / 6)
    with pytest.raises(DomainError):
        BesselMaskConfig(math.pi / 2)


@pytest.mark.parametrize("normalize", [True, False])
def test_single_assignment_pattern_is_arg_of_hologram(normalize):
    t = (ReceiverTarget(0, (0.02, -0.03, 0.35), 2),)
    pat = synthesize_pattern(GEOM, t, SRC, None, None, C10, normalize=normalize)
    T = single_mode_pattern(GEOM.positions(), SRC, 2, t[0], None, C10)
    assert np.max(wrapped_diff(pat.phase, np.angle(T))) < 1e-12
    assert np.all((pat.phase >= 0) & (pat.phase < 2 * math.pi))


@given(st.floats(-math.pi, math.pi))
@settings(max_examples=25, deadline=None)
def test_common_object_phasor_shifts_pattern(psi):
    t = (ReceiverTarget(0, (0.0, 0.0, 0.4), 1),)
    base = synthesize_pattern(GEOM, t, SRC, None, None, C10, normalize=False)
    rot = SourceAmplitudes({}, {0: complex(np.exp(1j * psi))})
    shifted = synthesize_pattern(GEOM, t, SRC, rot, None, C10, normalize=False)
    assert np.max(wrapped_diff(shifted.phase, base.phase + psi)) < 1e-12


@pytest.mark.parametrize("normalize", [True, False])
def test_mode_swap_leaves_pattern_unchanged(normalize):
    swapped = tuple(reversed(AXIAL))
    a = synthesize_pattern(GEOM, AXIAL, SRC, None, None, C10, normalize=normalize)
    b = synthesize_pattern(GEOM, swapped, SRC, None, None, C10, normalize=normalize)
    assert np.array_equal(a.phase, b.phase)


def test_grid_symmetry_without_vortex():
    t = (ReceiverTarget(0, (0, 0, 0.3), 0),)
    pat = synthesize_pattern(GEOM, t, SRC, None, None, C10)
    z = np.exp(1j * pat.phase)
    assert np.max(np.abs(z - z[:, ::-1])) < 1e-12
    assert np.max(np.abs(z - z[::-1, :])) < 1e-12


def _cancelling_setup():
    # Row m=1 of a 3-row grid lies on y=0; for x<0 the azimuth is pi, so
    # modes 0 and 1 aimed at the same point cancel there analytically.
    g = MetasurfaceGeometry(3, 4, 0.015)
    t = (ReceiverTarget(0, (0, 0, 0.3), 0), ReceiverTarget(1, (0, 0, 0.3), 1))
    return g, t


def test_analytic_cancellation_leaves_rounding_residual():
    g, t = _cancelling_setup()
    total = np.abs(vector_sum(g, t, SRC, None, None, C10))
    assert np.all(total[1, :2] < 1e-13)
    assert np.all(np.delete(total.reshape(-1), [4, 5]) > 0.5)


def test_degenerate_sum_reports_units(monkeypatch):
    import vortexsim.hologram as hol

    g, t = _cancelling_setup()
    real = hol.vector_sum

    def exact(*args, **kw):
        out = real(*args, **kw)
        out[1, :2] = 0.0
        return out

    monkeypatch.setattr(hol, "vector_sum", exact)
    with pytest.raises(DegenerateSumError) as exc:
        synthesize_pattern(g, t, SRC, None, None, C10)
    assert exc.value.units == [(1, 0), (1, 1)]
    assert "(m=1, n=0)" in str(exc.value)


def test_distinct_modes_required():
    with pytest.raises(DomainError):
        synthesize_pattern(GEOM, (ReceiverTarget(0, (0, 0, 0.3), 1), ReceiverTarget(1, (0, 0, 0.5), 1)), SRC)


def _pattern_from_degrees(deg):
    g = MetasurfaceGeometry(1, len(deg), 0.015)
    return PhasePattern(g, np.radians(np.asarray(deg, dtype=float))[None, :])


def test_quantize_examples():
    q = quantize_phase(_pattern_from_degrees([0.0, 44.0, 46.0, 45.0, 359.0, 135.0]), 4)
    assert q.states[0].tolist() == [0, 0, 1, 0, 0, 1]
    for L in (2, 3, 8):
        assert quantize_phase(_pattern_from_degrees([0.0]), L).states[0, 0] == 0
    assert np.allclose(q.phase[0, :3], [0, 0, math.pi / 2])


@given(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=1, max_size=40), st.integers(2, 16))
def test_quantize_idempotent_and_nearest(phases, L):
    p = PhasePattern(MetasurfaceGeometry(1, len(phases), 0.015), np.array(phases)[None, :])
    q = quantize_phase(p, L)
    again = quantize_phase(q.as_phase_pattern(), L)
    assert np.array_equal(q.states, again.states)
    assert np.all(wrapped_diff(q.phase, p.phase) <= math.pi / L + 1e-12)


def test_quantized_invariants():
    with pytest.raises(DomainError):
        quantize_phase(_pattern_from_degrees([0.0]), 1)
    with pytest.raises(DomainError):
        quantize_phase(_pattern_from_degrees([0.0]), 4, -0.5)


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=30))
def test_wrap_preserves_phasor(raw):
    p = PhasePattern(MetasurfaceGeometry(1, len(raw), 0.015), np.array(raw)[None, :])
    assert np.all((p.phase >= 0) & (p.phase < 2 * math.pi))
    assert np.allclose(np.exp(1j * p.phase), np.exp(1j * np.array(raw))[None, :], atol=1e-12)
    assert np.allclose(np.exp(1j * np.unwrap(p.phase[0])), np.exp(1j * p.phase[0]), atol=1e-12)
