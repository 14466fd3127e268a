import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaze_effort.model import DegenerateError, Fixation, GazeSample
from gaze_effort.retinal import (InsufficientSamplesError, angular_travel, displacement,
                                 observation_importance, retinal_flow)

RATE = 90.0


def stream(points):
    """Samples whose fixated point follows ``points`` (observer frame)."""
    out = []
    for i, p in enumerate(np.asarray(points, dtype=float)):
        out.append(GazeSample(i / RATE, tuple(p / np.linalg.norm(p)), tuple(p)))
    return out


def fix_for(samples, **kw):
    rho = float(np.mean([s.depth for s in samples]))
    return Fixation(0, samples[0].t, samples[-1].t, 0, len(samples) - 1, samples[0].dir, kw.pop("rho", rho), **kw)


def arc(radius, degrees, n=28):
    ang = np.radians(np.linspace(0, degrees, n))
    return np.stack([radius * np.sin(ang), np.zeros(n), radius * np.cos(ang)], axis=1)


# --- displacement -------------------------------------------------------------

def test_static_stimulus_has_no_displacement():
    s = stream([(0, 0, 2)] * 10)
    assert displacement(fix_for(s), s) == ((0.0, 0.0, 0.0), 0.0)


def test_displacement_arithmetic():
    s = stream([(0, 0, 2), (0.1, 0, 2), (0.2, 0, 2)])
    assert displacement(fix_for(s), s)[1] == pytest.approx(0.2, abs=1e-15)


def test_constant_velocity_displacement():
    # 0.5 m/s lateral for 0.3 s (28 samples at 90 Hz)
    t = np.arange(28) / RATE
    s = stream(np.stack([0.5 * t, np.zeros_like(t), np.full_like(t, 10.0)], axis=1))
    assert displacement(fix_for(s), s)[1] == pytest.approx(0.15, abs=1e-9)


def test_displacement_needs_two_usable_samples():
    s = stream([(0, 0, 2), (0, 0, 2)])
    s[1] = GazeSample(s[1].t, s[1].dir, s[1].hit, valid=False)
    with pytest.raises(InsufficientSamplesError):
        displacement(fix_for(s), s)


# --- retinal flow --------------------------------------------------------------

def test_no_angular_travel_no_flow():
    s = stream([(0, 0, 3)] * 12)
    assert retinal_flow(fix_for(s), s) == (0.0, 0.0)


def test_flow_is_arc_over_depth():
    # 0.05 rad on a circle of radius 2 -> m = 0.1 m
    s = stream(arc(2.0, math.degrees(0.05)))
    m, flow = retinal_flow(fix_for(s), s)
    assert m == pytest.approx(0.1, rel=1e-12)
    assert flow == pytest.approx(0.05, rel=1e-12)


@pytest.mark.parametrize("radius", [0.5, 2.0, 10.0, 80.0])
def test_three_degree_arc(radius):
    s = stream(arc(radius, 3.0))
    for mode in ("path", "endpoint"):
        _, flow = retinal_flow(fix_for(s), s, mode)
        assert flow == pytest.approx(3 * math.pi / 180, abs=1e-6)


def test_zero_depth_rejected():
    s = stream(arc(2.0, 1.0))
    with pytest.raises(DegenerateError):
        retinal_flow(fix_for(s, rho=0.0), s)


def test_radial_motion_has_no_flow_or_importance():
    d = np.array([0.3, 0.1, 1.0]) / np.linalg.norm([0.3, 0.1, 1.0])
    s = stream([d * r for r in np.linspace(20, 15, 30)])
    f = fix_for(s)
    _, u_mag = displacement(f, s)
    m, flow = retinal_flow(f, s)
    assert flow == 0.0
    assert observation_importance(Fixation(**{**f.__dict__, "I": flow, "m": m, "u_mag": u_mag})) == 0.0


def test_path_mode_counts_back_and_forth():
    pts = np.concatenate([arc(5.0, 2.0, 15), arc(5.0, 2.0, 15)[::-1]])
    s = stream(pts)
    assert angular_travel(s, "path") == pytest.approx(math.radians(4.0), rel=1e-9)
    assert angular_travel(s, "endpoint") == pytest.approx(0.0, abs=1e-12)


# --- observation importance ---------------------------------------------------

def _with(I, u_mag):
    return Fixation(0, 0.0, 0.3, 0, 1, (0.0, 0.0, 1.0), 2.0, I=I, m=I * 2.0, u_mag=u_mag)


def test_importance_arithmetic():
    assert observation_importance(_with(0.05, 0.2)) == pytest.approx(0.25)


def test_importance_of_static_stimulus_is_zero():
    assert observation_importance(_with(0.0, 0.0)) == 0.0
    assert observation_importance(_with(0.01, 5e-7)) == 0.0


@pytest.mark.parametrize("depth", [2.0, 8.0, 30.0])
def test_tangential_motion_importance_is_inverse_depth(depth):
    # the point circles the observer: 0.3 m/s along the arc for 0.3 s
    s = stream(arc(depth, math.degrees(0.09 / depth)))
    f = fix_for(s)
    u, u_mag = displacement(f, s)
    m, flow = retinal_flow(f, s)
    J = observation_importance(Fixation(**{**f.__dict__, "u_mag": u_mag, "I": flow, "m": m}))
    # chord vs arc differs at second order in the swept angle
    assert J == pytest.approx(1.0 / depth, rel=1e-4)


# --- properties ----------------------------------------------------------------

finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(finite, finite, st.floats(1, 20)), min_size=2, max_size=20),
       st.floats(0.01, 100))
def test_flow_is_scale_invariant(points, c):
    s = stream(points)
    s_scaled = stream(np.asarray(points) * c)
    _, a = retinal_flow(fix_for(s), s)
    _, b = retinal_flow(fix_for(s_scaled), s_scaled)
    assert a >= 0
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)
    assert angular_travel(s, "path") >= angular_travel(s, "endpoint") - 1e-12
