import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from alphabrush.bells import (Bell, Ramp, ResolutionError, central_bell_hat, central_bell_time,
                              decay_certificate)
from alphabrush.covering import Interval


def ramp_oracle(t, k=3):
    # scalar re-derivation of the iterated-sine ramp
    t = max(-1.0, min(1.0, t))
    for _ in range(k):
        t = math.sin(math.pi * t / 2)
    return math.sin(math.pi / 4 * (1 + t))


def test_ramp_matches_scalar_oracle():
    rho = Ramp(3)
    ts = np.linspace(-1.3, 1.3, 501)
    np.testing.assert_allclose(rho(ts), [ramp_oracle(t) for t in ts], rtol=0, atol=1e-15)


def test_ramp_shape():
    rho = Ramp(3)
    assert rho(-1.0) == pytest.approx(0.0, abs=1e-16) and rho(-7.0) == pytest.approx(0.0, abs=1e-16)
    assert rho(1.0) == 1.0 and rho(9.0) == 1.0
    assert rho(0.0) == pytest.approx(math.sqrt(0.5))
    t = np.linspace(-1, 1, 2001)
    assert np.all(np.diff(rho(t)) >= 0)


@given(st.floats(-5, 5, allow_nan=False), st.integers(0, 5))
def test_property_ramp_identity(t, k):
    rho = Ramp(k)
    assert abs(rho(t) ** 2 + rho(-t) ** 2 - 1.0) <= 1e-15


def test_ramp_identity_dense():
    rho = Ramp(3)
    xi = np.linspace(-2, 2, 100_000)
    assert np.max(np.abs(rho(xi) ** 2 + rho(-xi) ** 2 - 1.0)) <= 1e-12


def test_bell_support_and_plateau():
    iv = Interval(1.0, 3.0, 0.2, 0.1)
    b = Bell(iv)
    assert b(0.8 - 1e-9) == 0.0 and b(3.1 + 1e-9) == 0.0
    s = np.linspace(1.2, 2.9, 101)
    np.testing.assert_allclose(b(s), 1.0, atol=1e-15)
    assert b(1.0) == pytest.approx(math.sqrt(0.5))


def test_bell_reflection_symmetry():
    # b_I(xi) = b_J(2 r - xi) on the shared collar of compatible neighbours
    I, J = Interval(0.0, 1.0, 0.1, 0.2), Interval(1.0, 2.5, 0.2, 0.3)
    s = np.linspace(0.8, 1.2, 301)
    np.testing.assert_allclose(Bell(I)(s), Bell(J)(2.0 - s), atol=1e-15)
    np.testing.assert_allclose(Bell(I)(s) ** 2 + Bell(J)(s) ** 2, 1.0, atol=1e-15)


def test_bell_compatibility_default(default_cov):
    worst = 0.0
    ivs = default_cov.axis_intervals()
    for a, b in zip(ivs, ivs[1:]):
        if a.hi != b.lo:
            continue
        s = np.linspace(a.lo + a.eps_lo, b.hi - b.eps_hi, 2001)
        worst = max(worst, np.max(np.abs(Bell(a)(s) ** 2 + Bell(b)(s) ** 2 - 1)))
    assert worst <= 1e-12


def test_central_hat_rescaling():
    iv = Interval(2.0, 5.0, 0.3, 0.6)
    xi = np.linspace(1.5, 5.7, 77)
    np.testing.assert_allclose(central_bell_hat(Bell(iv), (xi - 2.0) / 3.0), Bell(iv)(xi), atol=1e-15)


@pytest.mark.parametrize("x", [0.0, 0.7, 3.0, 11.5, 40.0])
def test_central_time_against_adaptive_quadrature(x):
    bell = Bell(Interval(0.0, 1.0, 0.15, 0.1))

    def part(fn):
        return quad(lambda u: bell.hat_central(u) * fn(x * u), -0.15, 1.1, limit=400, epsabs=1e-14,
                    points=[0.15, 0.9])[0]

    ref = (part(math.cos) + 1j * part(math.sin)) / math.sqrt(2 * math.pi)
    got = central_bell_time(bell, np.array([x]))[0]
    assert abs(got - ref) <= 1e-11


def test_central_time_resolution_guard():
    with pytest.raises(ResolutionError):
        central_bell_time(Bell(Interval(0, 1, 0.1, 0.1)), np.zeros(3), nodes_per_ramp=32)


def test_decay_certificate_bounds_samples():
    bell = Bell(Interval(0.0, 1.0, 0.2, 0.2))
    cert = decay_certificate(bell, r=4.0, x_max=500.0, n_samples=800)
    x = np.linspace(0, 500, 997)
    g = np.abs(central_bell_time(bell, x))
    assert math.isfinite(cert.C)
    assert np.all(g * (1 + x) ** 4 <= 1.05 * cert.C)


def test_decay_certificate_depends_only_on_ratios():
    # g_I only involves eps/|I|, so bells of equal cutoff ratios share C
    a = decay_certificate(Bell(Interval(0.0, 1.0, 0.1, 0.05)), n_samples=500, x_max=300)
    b = decay_certificate(Bell(Interval(4.0, 9.0, 0.5, 0.25)), n_samples=500, x_max=300)
    assert a.C == pytest.approx(b.C, rel=1e-9)


def test_decay_certificate_grows_with_sharper_ramps():
    wide = decay_certificate(Bell(Interval(0.0, 1.0, 0.2, 0.2)), n_samples=500, x_max=300).C
    sharp = decay_certificate(Bell(Interval(0.0, 1.0, 0.02, 0.02)), n_samples=500, x_max=300).C
    assert sharp > wide
