import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from alphabrush.brushlet1d import (BrushletIndex1D, IntervalOperator, TailWarning, analyze_interval,
                                   brushlet_hat, brushlet_time, project_spectrum)
from alphabrush.covering import Interval, fuse
from alphabrush.grid import FrequencyAxis, MisalignedGridError, Spectrum1D

I0 = Interval(1.0, 3.0, 0.15, 0.25)
J0 = Interval(3.0, 4.5, 0.25, 0.2)


def quad_inner(f, g, lo, hi, brk=()):
    return quad(lambda x: f(x) * g(x), lo, hi, points=list(brk), limit=500, epsabs=1e-13)[0]


@pytest.mark.parametrize("n,m", [(0, 0), (0, 1), (3, 3), (2, 7), (5, 6)])
def test_orthonormal_within_interval(n, m):
    a, b = BrushletIndex1D(I0, n), BrushletIndex1D(I0, m)
    lo, hi = I0.lo - I0.eps_lo, I0.hi + I0.eps_hi
    v = quad_inner(lambda x: brushlet_hat(a, x), lambda x: brushlet_hat(b, x), lo, hi,
                   [I0.lo + I0.eps_lo, I0.hi - I0.eps_hi])
    assert v == pytest.approx(1.0 if n == m else 0.0, abs=1e-10)


@pytest.mark.parametrize("n,m", [(0, 0), (1, 4), (6, 2)])
def test_orthogonal_across_compatible_neighbours(n, m):
    a, b = BrushletIndex1D(I0, n), BrushletIndex1D(J0, m)
    v = quad_inner(lambda x: brushlet_hat(a, x), lambda x: brushlet_hat(b, x), 2.75, 3.25, [3.0])
    assert abs(v) <= 1e-11


@pytest.mark.parametrize("n", [0, 3])
@pytest.mark.parametrize("x", [-4.0, -0.3, 0.0, 2.2, 9.0])
def test_time_domain_against_inverse_transform(n, x):
    idx = BrushletIndex1D(I0, n)
    lo, hi = I0.lo - I0.eps_lo, I0.hi + I0.eps_hi
    pts = [I0.lo + I0.eps_lo, I0.hi - I0.eps_hi]
    re = quad(lambda s: brushlet_hat(idx, s) * math.cos(s * x), lo, hi, points=pts, limit=400, epsabs=1e-14)[0]
    im = quad(lambda s: brushlet_hat(idx, s) * math.sin(s * x), lo, hi, points=pts, limit=400, epsabs=1e-14)[0]
    ref = (re + 1j * im) / math.sqrt(2 * math.pi)
    assert abs(brushlet_time(idx, np.array([x]))[0] - ref) <= 1e-11


def test_two_humps():
    idx = BrushletIndex1D(Interval(0.0, 1.0, 0.1, 0.1), 8)
    e = idx.e
    x = np.linspace(-3 * e, 3 * e, 2001)
    w = np.abs(brushlet_time(idx, x))
    peak = w.max()
    near = np.abs(np.abs(x) - e) < 0.25 * e
    assert w[near].max() == pytest.approx(peak)
    assert w[np.abs(x) < 0.5 * e].max() < 0.2 * peak


@pytest.fixture(scope="module")
def axis():
    knots = [(1.0, 0.15), (3.0, 0.25), (4.5, 0.2), (-2.0, 0.3)]
    return FrequencyAxis.composite(knots, 12.0, [(-12.0, 12.0, 60.0)], 32, 32)


@pytest.fixture(scope="module")
def noise(axis):
    r = np.random.default_rng(5)
    return r.standard_normal(len(axis)) + 1j * r.standard_normal(len(axis))


def test_projection_algebra(axis, noise):
    A, B, U = (IntervalOperator(iv, axis) for iv in (I0, J0, fuse(I0, J0)))
    PA, PB, PU = A.apply(noise), B.apply(noise), U.apply(noise)
    s = noise.size and np.max(np.abs(noise))
    plate = axis.support_slice(I0.lo + I0.eps_lo, J0.hi - J0.eps_hi)
    assert np.max(np.abs(PA[plate] + PB[plate] - noise[plate])) <= 1e-12 * s
    assert np.max(np.abs(PA + PB - PU)) <= 1e-12 * s
    assert np.max(np.abs(A.apply(PA) - PA)) <= 1e-12 * s
    g = np.roll(noise, 17).conj()
    w = axis.weights
    assert abs(np.sum(w * PA * np.conj(g)) - np.sum(w * noise * np.conj(A.apply(g)))) <= 1e-12 * np.sum(
        w * np.abs(noise) * np.abs(g))
    assert np.max(np.abs(A.apply(PB))) <= 1e-12 * s  # disjoint ranges


def test_projection_fixes_brushlets(axis):
    A = IntervalOperator(I0, axis)
    W = A.basis(min(12, A.n_cap))
    for k in range(W.shape[1]):
        np.testing.assert_allclose(A.apply_local(W[:, k].astype(complex)), W[:, k], atol=1e-12)


def test_grid_gram_matches_identity(axis):
    A = IntervalOperator(I0, axis)
    W = A.basis(A.n_cap)
    G = W.T @ (A.w[:, None] * W)
    assert np.max(np.abs(G - np.eye(A.n_cap))) <= 1e-12


def test_analyze_interval_recovers_coefficients(axis):
    A = IntervalOperator(I0, axis)
    coeff = np.random.default_rng(0).standard_normal(10) + 0j
    vals = np.zeros(len(axis), complex)
    vals[A.sl] = A.basis(10) @ coeff
    c, deficit = analyze_interval(I0, Spectrum1D(axis, vals), 15)
    np.testing.assert_allclose(c[:10], coeff, atol=1e-12)
    assert np.max(np.abs(c[10:])) <= 1e-12
    assert abs(deficit) <= 1e-12


def test_analyze_interval_warns_on_short_expansion(axis, noise):
    with pytest.warns(TailWarning):
        analyze_interval(I0, Spectrum1D(axis, noise), 2, tail_tol=1e-8)


def test_project_spectrum_is_local(axis, noise):
    out = project_spectrum(I0, Spectrum1D(axis, noise))
    outside = (axis.nodes < I0.lo - I0.eps_lo) | (axis.nodes > I0.hi + I0.eps_hi)
    assert np.all(out.values[outside] == 0)


def test_misaligned_uniform_axis():
    with pytest.raises(MisalignedGridError):
        FrequencyAxis.uniform(8.0, 0.25, [(1.1, 0.1)])


def test_uniform_axis_projection():
    ax = FrequencyAxis.uniform(8.0, 1 / 64, [(1.0, 0.15), (3.0, 0.25), (4.5, 0.2)])
    f = np.exp(-((ax.nodes - 2.2) ** 2)).astype(complex)
    A, B, U = (IntervalOperator(iv, ax) for iv in (I0, J0, fuse(I0, J0)))
    assert np.max(np.abs(A.apply(f) + B.apply(f) - U.apply(f))) <= 1e-14


def test_axis_must_cover_support(axis):
    with pytest.raises(MisalignedGridError):
        IntervalOperator(Interval(10.0, 40.0, 0.1, 0.1), axis)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=12))
def test_property_synthesis_analysis(coeffs):
    ax = FrequencyAxis.composite([(1.0, 0.15), (3.0, 0.25)], 6.0, [(-6.0, 6.0, 40.0)], 32, 32)
    A = IntervalOperator(I0, ax)
    k = min(len(coeffs), A.n_cap)
    c = np.asarray(coeffs[:k], dtype=complex)
    vals = np.zeros(len(ax), complex)
    vals[A.sl] = A.basis(k) @ c
    back = A.coefficients(vals[A.sl], k)
    np.testing.assert_allclose(back, c, atol=1e-11)
    # energy is preserved by the orthonormal expansion
    assert np.sum(ax.weights * np.abs(vals) ** 2) == pytest.approx(np.sum(np.abs(c) ** 2), abs=1e-10)
