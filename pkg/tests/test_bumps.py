"""Mollifier profile and its derivative stack, checked against FD."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from thinflow.bumps import (
    bump_gradient,
    bump_hessian,
    bump_third,
    bump_value,
    profile,
    profile_d1,
    profile_d2,
    profile_d3,
    window_derivative,
    window_value,
)


def test_profile_shape():
    assert profile(0.0) == 1.0
    assert profile(1.0) == 0.0
    assert profile(2.5) == 0.0
    s = np.linspace(0.0, 0.999, 200)
    v = profile(s)
    assert (np.diff(v) < 0).all()          # strictly decreasing inside
    assert (v >= 0).all()


def test_profile_vanishes_smoothly_at_edge():
    s = 1.0 - np.logspace(-8, -2, 13)
    for d in (profile, profile_d1, profile_d2, profile_d3):
        assert np.abs(d(s))[0] < 1e-300 or np.abs(d(s))[0] < np.abs(d(s))[-1]
    assert profile_d1(1.0) == 0.0 and profile_d3(1.0) == 0.0


@given(st.floats(0.01, 0.97))
@settings(max_examples=100, deadline=None)
def test_profile_d1_matches_fd(s):
    h = 1e-7
    fd = (profile(s + h) - profile(s - h)) / (2 * h)
    assert abs(fd - profile_d1(s)) < 2e-5 * max(1.0, abs(fd))


@given(st.floats(0.01, 0.95))
@settings(max_examples=100, deadline=None)
def test_profile_d2_matches_fd(s):
    h = 1e-5
    fd = (profile(s + h) - 2 * profile(s) + profile(s - h)) / h**2
    assert abs(fd - profile_d2(s)) < 1e-3 * max(1.0, abs(fd))


def test_profile_d3_matches_fd():
    s = np.linspace(0.05, 0.9, 40)
    h = 1e-4
    fd = (profile_d2(s + h) - profile_d2(s - h)) / (2 * h)
    assert np.abs(fd - profile_d3(s)).max() < 1e-4 * max(1.0, np.abs(fd).max())


def test_bump_gradient_hessian_third_fd():
    rng = np.random.default_rng(17)
    c, rho = 0.3 - 0.7j, 0.8
    pts = c + 0.7 * rho * (rng.uniform(-1, 1, 30) + 1j * rng.uniform(-1, 1, 30))
    h = 1e-6

    g = bump_gradient(pts, c, rho, 2.5)
    gx = (bump_value(pts + h, c, rho, 2.5) - bump_value(pts - h, c, rho, 2.5)) / (2 * h)
    gy = (bump_value(pts + 1j * h, c, rho, 2.5) - bump_value(pts - 1j * h, c, rho, 2.5)) / (2 * h)
    assert np.abs(g - (gx + 1j * gy)).max() < 1e-6

    h11, h12, h22 = bump_hessian(pts, c, rho, 2.5)
    g_xp = bump_gradient(pts + h, c, rho, 2.5)
    g_xm = bump_gradient(pts - h, c, rho, 2.5)
    g_yp = bump_gradient(pts + 1j * h, c, rho, 2.5)
    fd11 = (g_xp.real - g_xm.real) / (2 * h)
    fd12 = (g_xp.imag - g_xm.imag) / (2 * h)
    fd22 = (g_yp.imag - bump_gradient(pts - 1j * h, c, rho, 2.5).imag) / (2 * h)
    assert np.abs(h11 - fd11).max() < 1e-5
    assert np.abs(h12 - fd12).max() < 1e-5
    assert np.abs(h22 - fd22).max() < 1e-5

    d3 = bump_third(pts, c, rho, 2.5)
    h11p, _, _ = bump_hessian(pts + h, c, rho, 2.5)
    h11m, _, _ = bump_hessian(pts - h, c, rho, 2.5)
    assert np.abs(d3[(1, 1, 1)] - (h11p - h11m) / (2 * h)).max() < 1e-3
    h11yp, _, h22yp = bump_hessian(pts + 1j * h, c, rho, 2.5)
    h11ym, _, h22ym = bump_hessian(pts - 1j * h, c, rho, 2.5)
    assert np.abs(d3[(1, 1, 2)] - (h11yp - h11ym) / (2 * h)).max() < 1e-3
    assert np.abs(d3[(2, 2, 2)] - (h22yp - h22ym) / (2 * h)).max() < 1e-3


def test_bump_support():
    c, rho = 1.0 + 1.0j, 0.5
    outside = np.array([c + 0.51j, c + 0.6, c - 2.0])
    assert np.all(bump_value(outside, c, rho) == 0.0)
    assert np.all(bump_gradient(outside, c, rho) == 0.0)


def test_window_compact_support():
    t = np.linspace(-1.0, 1.0, 2001)
    v = window_value(t, 0.25, 0.2)
    assert v.max() <= 1.0
    assert v[t <= 0.05].max() == 0.0
    assert v[t >= 0.45].max() == 0.0
    assert window_value(0.25, 0.25, 0.2) == 1.0
    d = window_derivative(t, 0.25, 0.2)
    h = 1e-6
    fd = (window_value(0.3 + h, 0.25, 0.2) - window_value(0.3 - h, 0.25, 0.2)) / (2 * h)
    assert abs(window_derivative(0.3, 0.25, 0.2) - fd) < 1e-5
    assert np.count_nonzero(d) > 0
