import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from poscomm import Grid, TanhAffine, TanhMeasure, to_momentum, to_position
from poscomm.grids import quadrature_weights

finite_floats = st.floats(-3.0, 3.0, allow_nan=False)
weights_st = st.lists(st.floats(0.01, 2.0), min_size=1, max_size=6)
locs_st = st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=6)


@st.composite
def tanh_measures(draw):
    n = draw(st.integers(1, 5))
    locs = draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n,
                         unique_by=lambda v: round(v, 2)))
    wts = draw(st.lists(st.floats(0.01, 2.0), min_size=n, max_size=n))
    offset = draw(st.floats(-1.0, 1.0))
    alpha = draw(st.floats(0.3, 2.0))
    return TanhMeasure(locs, wts, offset=offset, alpha=alpha)


@settings(max_examples=50, deadline=None, derandomize=True)
@given(tanh_measures())
def test_tanh_measure_monotone(m):
    t = np.linspace(-10, 10, 200)
    assert np.all(np.diff(m(t)) >= 0)


@settings(max_examples=50, deadline=None, derandomize=True)
@given(tanh_measures(), st.floats(-5, 5), st.floats(0.05, 0.9))
def test_conjugate_symmetry(m, re, frac):
    z = re + 1j * frac * m.alpha
    assert abs(m(np.conj(z)) - np.conj(m(z))) < 1e-12


@settings(max_examples=40, deadline=None, derandomize=True)
@given(tanh_measures())
def test_herglotz_on_own_strip(m):
    from poscomm import herglotz_check
    rep = herglotz_check(m, m.alpha, samples=12, window=10.0)
    assert rep.passed


@settings(max_examples=40, deadline=None, derandomize=True)
@given(st.floats(0.3, 3.0), st.floats(-2.0, 2.0), st.floats(0.1, 2.0))
def test_tanh_affine_variation(rate, center, scale):
    fn = TanhAffine(rate=rate, center=center, scale=scale)
    assert abs(fn.variation - 2 * scale) < 1e-12
    # saturation near the window ends
    assert abs(fn(center + 40.0 / rate) - fn.limits[1]) < 1e-12


@settings(max_examples=20, deadline=None, derandomize=True)
@given(st.integers(4, 8), st.integers(0, 1000))
def test_transform_round_trip(log2n, seed):
    g = Grid(12.0, 2 ** log2n)
    v = np.random.default_rng(seed).standard_normal(g.n)
    assert np.max(np.abs(to_position(g, to_momentum(g, v)) - v)) < 1e-12


@settings(max_examples=20, deadline=None, derandomize=True)
@given(st.floats(0.5, 40.0), st.integers(3, 11))
def test_weights_sum(L, log2n):
    g = Grid(L, 2 ** log2n)
    assert abs(quadrature_weights(g).sum() - 2 * L) < 1e-10 * L
