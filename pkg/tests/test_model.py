import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaze_effort.model import Distribution, GazeSample, GridSpec, validate_trial
from gaze_effort.pipeline import analyze_trial

from conftest import samples_from, trial_of, unit


def test_clean_trial_has_no_violations():
    trial = trial_of(samples_from([unit(a) for a in np.linspace(0, 5, 20)]))
    assert validate_trial(trial) == []


def test_short_dir_is_reported_once_by_index():
    samples = samples_from([unit(0)] * 10)
    samples[4] = dataclasses.replace(samples[4], dir=(0.0, 0.0, 0.5))
    out = validate_trial(trial_of(samples))
    assert len(out) == 1
    assert out[0].startswith("sample 4:")


def test_time_must_increase():
    samples = samples_from([unit(0)] * 5)
    samples[3] = dataclasses.replace(samples[3], t=samples[2].t)
    out = validate_trial(trial_of(samples))
    assert out == [f"sample 3: time {samples[2].t!r} not after previous {samples[2].t!r}"]


def test_depth_defaults_to_hit_norm():
    s = GazeSample(0.0, (0, 0, 1), (3.0, 0.0, 4.0))
    assert s.depth == 5.0


def test_invalid_or_blink_samples_are_not_usable():
    assert not GazeSample(0.0, (0, 0, 1), (0, 0, 1), pupil=3.0, valid=False).usable
    assert not GazeSample(0.0, (0, 0, 1), (0, 0, 1), pupil=0.0).usable
    assert GazeSample(0.0, (0, 0, 1), (0, 0, 1)).usable


def test_synthetic_corpus_is_valid(exact_corpus):
    for trial, _ in exact_corpus:
        assert validate_trial(trial) == []
        # independent column scan of the same invariants
        a = trial.arrays
        assert np.all(np.abs(np.linalg.norm(a["dir"], axis=1) - 1) <= 1e-6)
        assert np.all(np.diff(a["t"]) > 0)
        assert np.all(a["depth"] >= 0)


def test_annotated_fixations_satisfy_invariants(exact_corpus):
    for trial, _ in exact_corpus[:8]:
        done = analyze_trial(trial)
        assert validate_trial(done) == []
        for f in done.fixations:
            assert f.I == f.m / f.rho
            assert f.tau > 0 and f.rho > 0 and f.I >= 0 and f.J >= 0


def test_grid_spec_bounds():
    with pytest.raises(ValueError):
        GridSpec(n_g=1)
    with pytest.raises(ValueError):
        GridSpec(half_angle=90)


def test_distribution_rejects_bad_mass():
    with pytest.raises(ValueError):
        Distribution(("a", "b"), (0.5, 0.6))
    with pytest.raises(ValueError):
        Distribution(("a", "b"), (1.5, -0.5))
    with pytest.raises(ValueError):
        Distribution(("a", "a"), (0.5, 0.5))


@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=60).filter(lambda w: sum(w) > 0))
def test_from_weights_normalizes(weights):
    d = Distribution.from_weights(range(len(weights)), weights)
    assert math.isclose(math.fsum(d.mass), 1.0, abs_tol=1e-9)
    assert all(m >= 0 for m in d.mass)
