"""Gauss-Legendre quadrature helpers with order-doubling drivers.

Nodes come from numpy.polynomial.legendre.leggauss and are cached per
order.  The drivers double the order until successive values agree to a
requested tolerance, raising QuadratureError when the cap is hit, so
every integral in the package carries its own convergence evidence.
"""

from functools import lru_cache

import numpy as np

from .errors import QuadratureError


@lru_cache(maxsize=None)
def gauss_nodes(n):
    """Nodes and weights on [-1, 1], cached."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_interval(a, b, n):
    """Nodes and weights transplanted to [a, b]."""
    x, w = gauss_nodes(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def tensor_rectangle(x0, x1, y0, y1, n):
    """Tensor product rule on a rectangle; returns complex nodes and weights."""
    gx, wx = gauss_interval(x0, x1, n)
    gy, wy = gauss_interval(y0, y1, n)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    W = np.outer(wx, wy)
    return (X + 1j * Y).ravel(), W.ravel()


def polar_disk(center, radius, n_r, n_phi):
    """Polar rule on a disk: Gauss in radius, trapezoid in angle.

    The area element r dr dphi is folded into the weights, which is what
    cancels an integrable 1/r singularity at the center.
    """
    r, wr = gauss_interval(0.0, radius, n_r)
    phi = np.arange(n_phi) * (2.0 * np.pi / n_phi)
    wphi = 2.0 * np.pi / n_phi
    R, P = np.meshgrid(r, phi, indexing="ij")
    nodes = center + R * np.exp(1j * P)
    wts = np.outer(wr * r, np.full(n_phi, wphi))
    return nodes.ravel(), wts.ravel()


def integrate_doubling(make_value, n0=16, n_max=1024, tol=1e-9):
    """Drive make_value(order) by doubling until |change| <= tol.

    make_value returns a scalar or ndarray; convergence is the max
    absolute change between consecutive orders.  Returns (value, order).
    """
    n = n0
    prev = make_value(n)
    while n < n_max:
        n *= 2
        cur = make_value(n)
        change = np.max(np.abs(np.asarray(cur) - np.asarray(prev)))
        if change <= tol:
            return cur, n
        prev = cur
    raise QuadratureError(
        f"order doubling reached n={n} without converging to {tol:g}"
    )


def trapezoid_closed_doubling(f, n0=64, n_max=1 << 20, tol=1e-8):
    """Trapezoid rule for smooth periodic integrands on [0, 1).

    f(t_array) -> values; doubling the node count until the value is
    stable.  Periodic smoothness makes this converge spectrally.
    """
    n = n0
    t = np.arange(n) / n
    prev = np.mean(f(t))
    while n < n_max:
        n *= 2
        t = np.arange(n) / n
        cur = np.mean(f(t))
        if abs(cur - prev) <= tol:
            return cur, n
        prev = cur
    raise QuadratureError(
        f"trapezoid doubling reached n={n} without converging to {tol:g}"
    )
