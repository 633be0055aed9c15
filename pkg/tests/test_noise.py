"""noise_profile tests: derivative-variance profile and noisy-beat flags."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatclean.exceptions import NoSamples
from beatclean.model import BeatMark, EcgRecord, SourceFormat
from beatclean.noise import (
    NoiseProfile,
    classify_noise,
    compute_noise_profile,
    regional_noise_means,
)


def _beats(times):
    return [BeatMark(float(t)) for t in times]


def _record(samples, fs):
    return EcgRecord(samples=np.asarray(samples, float), sample_rate=fs)


def test_constant_signal_zero_profile():
    rec = _record(np.full(3600, 1.25), 360.0)
    profile = compute_noise_profile(rec, _beats([2.0, 4.0, 6.0]))
    assert np.all(profile.per_beat == 0.0)


def test_linear_ramp_zero_profile():
    rec = _record(np.linspace(0.0, 5.0, 3600), 360.0)
    profile = compute_noise_profile(rec, _beats([2.0, 5.0, 8.0]))
    assert np.max(profile.per_beat) < 1e-18


def test_iid_noise_matches_analytic_variance():
    # derivative of i.i.d. noise: Var((x[i+1]-x[i]) * fs) = 2 sigma^2 fs^2
    fs, sigma = 360.0, 0.05
    rng = np.random.default_rng(123)
    rec = _record(rng.normal(0.0, sigma, int(fs * 120)), fs)
    beats = _beats(np.arange(1.0, 119.0, 0.8))
    profile = compute_noise_profile(rec, beats, window_ms=200.0)
    expected = 2.0 * sigma ** 2 * fs ** 2
    assert np.mean(profile.per_beat) == pytest.approx(expected, rel=0.10)
    # simulation oracle agrees: variance of diff of fresh noise draws
    sim = np.var(np.diff(rng.normal(0.0, sigma, 200_000)) * fs)
    assert np.mean(profile.per_beat) == pytest.approx(sim, rel=0.10)


def test_window_truncated_at_boundaries():
    fs = 250.0
    rng = np.random.default_rng(5)
    rec = _record(rng.normal(0.0, 0.1, 1000), fs)
    profile = compute_noise_profile(rec, _beats([0.0, 2.0, 3.999]))
    assert np.all(profile.per_beat > 0)


def test_scale_law_exact_power_of_two():
    fs = 250.0
    rng = np.random.default_rng(9)
    x = rng.normal(0.0, 0.1, 2500)
    beats = _beats([2.0, 4.0, 6.0, 8.0])
    base = compute_noise_profile(_record(x, fs), beats)
    for c in (0.5, 2.0, 8.0):
        scaled = compute_noise_profile(_record(c * x, fs), beats)
        assert np.array_equal(scaled.per_beat, c * c * base.per_beat)


@settings(max_examples=50, deadline=None)
@given(c=st.floats(min_value=0.01, max_value=100.0, allow_nan=False))
def test_scale_law_general(c):
    fs = 250.0
    rng = np.random.default_rng(11)
    x = rng.normal(0.0, 0.1, 1500)
    beats = _beats([2.0, 4.0])
    base = compute_noise_profile(_record(x, fs), beats)
    scaled = compute_noise_profile(_record(c * x, fs), beats)
    assert np.allclose(scaled.per_beat, c * c * base.per_beat, rtol=1e-9)


def test_translation_invariance():
    fs = 250.0
    rng = np.random.default_rng(13)
    x = rng.normal(0.0, 0.1, 1500)
    beats = _beats([2.0, 4.0])
    base = compute_noise_profile(_record(x, fs), beats)
    shifted = compute_noise_profile(_record(x + 7.5, fs), beats)
    assert np.allclose(shifted.per_beat, base.per_beat, rtol=1e-9, atol=1e-15)


def test_profile_deterministic():
    fs = 250.0
    rng = np.random.default_rng(17)
    x = rng.normal(0.0, 0.1, 1500)
    beats = _beats([2.0, 4.0])
    a = compute_noise_profile(_record(x, fs), beats)
    b = compute_noise_profile(_record(x, fs), beats)
    assert np.array_equal(a.per_beat, b.per_beat)


def test_no_samples_error():
    rec = EcgRecord(
        samples=np.empty(0),
        sample_rate=1000.0,
        source_format=SourceFormat.RRI_ONLY,
        rri=np.full(10, 0.8),
    )
    with pytest.raises(NoSamples):
        compute_noise_profile(rec, _beats([1.0]))


# ----------------------------------------------------------- classification


def _profile(values):
    return NoiseProfile(per_beat=np.asarray(values, float), window_ms=200.0)


def test_uniform_profile_no_flags():
    profile = _profile(np.full(50, 3.0))
    flags = classify_noise(profile, regional_noise_means(profile))
    assert not flags.any()


def test_single_spike_flagged():
    values = np.full(50, 3.0)
    values[25] = 6.0  # 2x the regional mean
    profile = _profile(values)
    # independent oracle: brute-force mean over the 20-neighbour window
    lo, hi = max(0, 25 - 20), min(50, 25 + 21)
    neighbours = [values[i] for i in range(lo, hi) if i != 25]
    oracle_mean = sum(neighbours) / len(neighbours)
    assert values[25] > 1.2 * oracle_mean
    flags = classify_noise(profile, regional_noise_means(profile))
    assert flags[25]
    assert flags.sum() == 1


def test_exact_boundary_not_flagged():
    values = np.full(50, 3.0)
    values[30] = 1.2 * 3.0  # exactly 120 % of the running mean
    profile = _profile(values)
    flags = classify_noise(profile, regional_noise_means(profile))
    assert not flags[30]


def test_sustained_noise_burst_fully_flagged():
    # a long burst must stay flagged even though its own values dominate
    # the symmetric neighbourhood: the reference level is the clean level
    values = np.concatenate([np.full(60, 2.0), np.full(40, 10.0), np.full(60, 2.0)])
    profile = _profile(values)
    flags = classify_noise(profile, regional_noise_means(profile))
    assert flags[60:100].all()
    assert not flags[:60].any()
    assert not flags[100:].any()


def test_classify_alignment_error():
    profile = _profile(np.full(10, 1.0))
    with pytest.raises(ValueError):
        classify_noise(profile, np.zeros(5))
