"""Quadrature building blocks: exactness, doubling drivers, failure modes."""

import numpy as np
import pytest

from thinflow.errors import QuadratureError
from thinflow.quadrature import (
    gauss_interval,
    gauss_nodes,
    integrate_doubling,
    polar_disk,
    tensor_rectangle,
    trapezoid_closed_doubling,
)


def test_gauss_nodes_basic():
    x, w = gauss_nodes(12)
    assert x.shape == w.shape == (12,)
    assert abs(w.sum() - 2.0) < 1e-14
    assert np.all(np.diff(x) > 0)
    assert gauss_nodes(12)[0] is x    # cached


def test_gauss_exact_for_polynomials():
    # an n-point rule integrates degree 2n-1 exactly
    for n in (2, 5, 9):
        deg = 2 * n - 1
        x, w = gauss_interval(-1.0, 3.0, n)
        val = float((w * (x**deg + x**2)).sum())
        exact = (3.0 ** (deg + 1) - (-1.0) ** (deg + 1)) / (deg + 1) + 28.0 / 3.0
        assert abs(val - exact) < 1e-11 * abs(exact)


def test_gauss_interval_affine_change():
    x, w = gauss_interval(0.0, np.pi, 30)
    assert abs(float((w * np.sin(x)).sum()) - 2.0) < 1e-14
    assert x.min() > 0.0 and x.max() < np.pi
    assert abs(w.sum() - np.pi) < 1e-14


def test_tensor_rectangle_separable():
    nodes, wts = tensor_rectangle(0.0, 2.0, 1.0, 3.0, 8)
    val = float((wts * nodes.real**2 * nodes.imag).sum())
    assert abs(val - (8.0 / 3.0) * 4.0) < 1e-12
    assert abs(wts.sum() - 4.0) < 1e-13


def test_polar_disk_area_and_moment():
    nodes, wts = polar_disk(0.3 + 0.1j, 2.0, 20, 40)
    assert abs(wts.sum() - np.pi * 4.0) < 1e-10
    # first moment about the center vanishes by symmetry
    assert abs((wts * (nodes - (0.3 + 0.1j)).real).sum()) < 1e-12
    # the 1/r singularity integrates cleanly: int 1/|z-c| = 2 pi R
    val = float((wts / np.abs(nodes - (0.3 + 0.1j))).sum())
    assert abs(val - 4.0 * np.pi) < 1e-10


def test_integrate_doubling_converges():
    def make_value(n):
        x, w = gauss_interval(0.0, 1.0, n)
        return float((w * np.exp(x)).sum())

    val, order = integrate_doubling(make_value, n0=4, n_max=256, tol=1e-12)
    assert abs(val - (np.e - 1.0)) < 1e-12
    assert order >= 8


def test_integrate_doubling_vector_values():
    def make_value(n):
        x, w = gauss_interval(0.0, 1.0, n)
        return np.array([(w * x**2).sum(), (w * np.cos(x)).sum()])

    val, _ = integrate_doubling(make_value, n0=4, n_max=128, tol=1e-13)
    assert abs(val[0] - 1.0 / 3.0) < 1e-13
    assert abs(val[1] - np.sin(1.0)) < 1e-13


def test_integrate_doubling_raises_on_rough_integrand():
    # a jump never settles at this tolerance
    def make_value(n):
        x, w = gauss_interval(0.0, 1.0, n)
        return float((w * (x > 0.1234567)).sum())

    with pytest.raises(QuadratureError):
        integrate_doubling(make_value, n0=4, n_max=64, tol=1e-13)


def test_trapezoid_closed_doubling_periodic():
    mean, n = trapezoid_closed_doubling(
        lambda t: 1.0 + np.cos(6.0 * np.pi * t) ** 2, n0=8, n_max=512, tol=1e-12
    )
    assert abs(mean - 1.5) < 1e-12
    assert n <= 512


def test_trapezoid_closed_doubling_raises():
    rng = np.random.default_rng(3)

    def noisy(t):
        return rng.standard_normal(np.shape(t))

    with pytest.raises(QuadratureError):
        trapezoid_closed_doubling(noisy, n0=8, n_max=64, tol=1e-10)
