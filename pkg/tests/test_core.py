import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from gaborfit.core import (FramewiseWindowTrack, Signal, WindowParams, ambiguity, centered_time,
                           column_concentration, dgt, nsdgt, synth_window)
from gaborfit.lattice import QuantizedLattice, quantize, rectangular_lattice

sigmas = st.floats(min_value=0.05, max_value=20)
chirps = st.floats(min_value=-2, max_value=2)
lengths = st.integers(min_value=2, max_value=300)


def random_signal(rng, n, complex_=True):
    x = rng.standard_normal(n)
    if complex_:
        x = x + 1j * rng.standard_normal(n)
    return Signal(x)


def test_centered_time():
    assert centered_time(5).tolist() == [0, 1, 2, -2, -1]
    assert centered_time(6).tolist() == [0, 1, 2, -3, -2, -1]


@given(sigmas, chirps, lengths)
def test_window_unit_norm(sigma, s, n):
    g = synth_window(WindowParams(sigma, s), n)
    assert abs(np.linalg.norm(g.samples) - 1) <= 1e-12


@given(sigmas, chirps, lengths)
def test_chirp_factor_is_unimodular(sigma, s, n):
    a = synth_window(WindowParams(sigma, s), n).samples
    b = synth_window(WindowParams(sigma, 0.0), n).samples
    np.testing.assert_allclose(np.abs(a), np.abs(b), rtol=0, atol=1e-12)


@given(sigmas, lengths)
def test_unchirped_window_is_real_and_even(sigma, n):
    g = synth_window(WindowParams(sigma), n).samples
    assert np.all(g.imag == 0)
    t = np.arange(n)
    # wrapped evenness holds away from the unpaired index n/2 of even n
    paired = (n % 2 == 1) | (t != n // 2)
    np.testing.assert_allclose(g[paired], g[(-t) % n][paired], atol=1e-15)


def test_window_matches_direct_evaluation():
    for sigma, s, n in [(1.0, 0.0, 128), (0.3, 0.7, 97), (5.0, -1.2, 64)]:
        ref = np.array(oracles.window(sigma, s, n))
        np.testing.assert_allclose(synth_window(WindowParams(sigma, s), n).samples, ref,
                                   rtol=0, atol=1e-13)


def test_narrow_sigma_has_smaller_support():
    # direct evaluation of both windows (oracles.window) gives 47 and 23 samples
    def support(sigma):
        g = np.abs(synth_window(WindowParams(sigma), 256).samples)
        return int(np.sum(g > 1e-3 * g.max()))
    assert support(1.0) == 47
    assert support(0.25) == 23


def test_window_params_validation():
    with pytest.raises(ValueError):
        WindowParams(0.0)
    with pytest.raises(ValueError):
        WindowParams(1.0, float("nan"))
    with pytest.raises(ValueError):
        synth_window(WindowParams(1.0), 1)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(np.zeros(1))
    with pytest.raises(ValueError):
        Signal(np.array([1.0, np.inf]))
    with pytest.raises(ValueError):
        Signal(np.zeros(4), sample_rate=0)
    assert Signal(np.ones(3)).is_real
    assert not Signal(np.ones(3) * 1j).is_real


@st.composite
def dgt_case(draw):
    n = draw(st.integers(min_value=2, max_value=24))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    n_pts = draw(st.integers(min_value=1, max_value=2 * n))
    conjugate = draw(st.booleans())
    return n, seed, n_pts, conjugate


@given(dgt_case())
def test_dgt_matches_triple_sum(case):
    n, seed, n_pts, conjugate = case
    rng = np.random.default_rng(seed)
    f = random_signal(rng, n)
    gs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    g = synth_window(WindowParams(1.0), n)
    g = type(g)(g.params, gs / np.linalg.norm(gs))
    lat = QuantizedLattice.from_points(n, rng.integers(0, n, size=(n_pts, 2)))
    fast = dgt(f, g, lat, conjugate=conjugate).values
    ref = oracles.dgt_triple_sum(list(f.samples), list(g.samples), lat.points.tolist(), conjugate)
    assert np.linalg.norm(fast - ref) <= 1e-10 * max(np.linalg.norm(ref), 1e-300)


@pytest.mark.parametrize("n", [8, 16, 32])
def test_parseval_full_lattice(n, rng):
    f = random_signal(rng, n)
    g = synth_window(WindowParams(0.7, 0.4), n)
    c = dgt(f, g, QuantizedLattice.full(n))
    total = np.sum(np.abs(c.values) ** 2)
    assert abs(total - n * np.linalg.norm(f.samples) ** 2) <= 1e-10 * total


def test_linearity(rng):
    n = 48
    lat = quantize(rectangular_lattice(4, 3, n))
    g = synth_window(WindowParams(1.3, -0.5), n)
    f1, f2 = random_signal(rng, n), random_signal(rng, n)
    a, b = 2 - 1j, 0.3 + 4j
    lhs = dgt(Signal(a * f1.samples + b * f2.samples), g, lat).values
    rhs = a * dgt(f1, g, lat).values + b * dgt(f2, g, lat).values
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_impulse_gives_shifted_window():
    n = 32
    g = synth_window(WindowParams(0.8), n)
    c = dgt(Signal(np.eye(n)[0]), g, QuantizedLattice.full(n))
    m = c.matrix
    x = c.lattice.time_shifts
    np.testing.assert_allclose(m, np.repeat(g.samples[(-x) % n][:, None], n, axis=1), atol=1e-15)


@given(sigmas, st.floats(min_value=-1, max_value=1))
def test_window_against_itself_is_one(sigma, s):
    n = 64
    g = synth_window(WindowParams(sigma, s), n)
    c = dgt(Signal(g.samples), g, QuantizedLattice.from_points(n, [[0, 0]]))
    assert abs(c.values[0] - 1) <= 1e-12


def test_literal_form_changes_phase_only_for_real_windows(rng):
    n = 40
    f = random_signal(rng, n)
    lat = quantize(rectangular_lattice(5, 4, n))
    g = synth_window(WindowParams(1.0), n)
    np.testing.assert_allclose(dgt(f, g, lat).values, dgt(f, g, lat, conjugate=False).values)


def test_ambiguity_symmetry_and_peak():
    n = 64
    lat = QuantizedLattice.full(n)
    a = np.abs(ambiguity(synth_window(WindowParams(1.0), n), lat).matrix)
    idx = (-np.arange(n)) % n
    np.testing.assert_allclose(a, a[idx][:, idx], atol=1e-13)
    for s in (0.0, 0.5, -1.5):
        m = np.abs(ambiguity(synth_window(WindowParams(1.7, s), n), lat).matrix)
        assert abs(m[0, 0] - 1) <= 1e-12
        assert m.max() <= m[0, 0] + 1e-12


def test_ambiguity_shear():
    n = 256
    lat = quantize(rectangular_lattice(2, 2, n))

    def covariance(s):
        c = ambiguity(synth_window(WindowParams(1.0, s), n), lat)
        w = np.abs(c.values)
        x = centered_time(n)[c.points[:, 0]]
        xi = centered_time(n)[c.points[:, 1]]
        w = w / w.sum()
        return np.sum(w * x * xi) - np.sum(w * x) * np.sum(w * xi)

    assert abs(covariance(0.0)) <= 1e-10
    assert covariance(0.5) > 1.0


def test_nsdgt_constant_track_equals_dgt(rng):
    n = 96
    lat = quantize(rectangular_lattice(8, 4, n))
    f = random_signal(rng, n)
    p = WindowParams(2.0, 0.3)
    track = FramewiseWindowTrack.constant(p, lat.time_shifts.size)
    np.testing.assert_allclose(nsdgt(f, track, lat).values, dgt(f, synth_window(p, n), lat).values,
                               rtol=0, atol=1e-12)


def test_nsdgt_impulse_column_uses_own_window():
    n = 64
    lat = quantize(rectangular_lattice(8, 2, n))
    K = lat.time_shifts.size
    track = FramewiseWindowTrack([WindowParams(0.5 + k, 0.1 * k) for k in range(K)])
    c = nsdgt(Signal(np.eye(n)[0]), track, lat)
    for k, x in enumerate(lat.time_shifts):
        g = synth_window(track[k], n).samples
        np.testing.assert_allclose(c.matrix[k], np.conj(g[(-x) % n]), atol=1e-15)


def test_nsdgt_track_length_checked():
    n = 32
    lat = quantize(rectangular_lattice(4, 4, n))
    with pytest.raises(ValueError):
        nsdgt(Signal(np.ones(n)), FramewiseWindowTrack.constant(WindowParams(1.0), 3), lat)


def test_dgt_errors():
    g = synth_window(WindowParams(1.0), 16)
    with pytest.raises(ValueError):
        dgt(Signal(np.ones(8)), g, QuantizedLattice.full(8))
    with pytest.raises(ValueError):
        dgt(Signal(np.ones(16)), g, QuantizedLattice.full(8))


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_column_concentration_bounds(seed):
    rng = np.random.default_rng(seed)
    n = 32
    lat = quantize(rectangular_lattice(4, 1, n))
    c = dgt(random_signal(rng, n), synth_window(WindowParams(1.0), n), lat)
    r = column_concentration(c)
    L = lat.freq_index.shape[1]
    assert np.all(r <= 1 + 1e-12)
    assert np.all(r >= L ** (1 / 2.5 - 1 / 2) - 1e-12)
