"""Radial mollifier profiles and their derivatives.

Everything compactly supported in the package is built from the profile

    F(s) = exp(1 - 1/(1 - s))   for s < 1,   F(s) = 0 otherwise,

evaluated at s = |x - c|^2 / rho^2.  F is C-infinity, equals 1 at the
center, and vanishes with all derivatives at the support edge, so
equispaced sums over it converge faster than any power of the spacing.
Derivatives up to third order are provided analytically because the
space-time test fields need the Laplacian of a rotated gradient.
"""

import numpy as np


def profile(s):
    """F(s) elementwise; s may be any ndarray or scalar."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0
    t = np.where(inside, 1.0 - s, 1.0)
    out = np.where(inside, np.exp(1.0 - 1.0 / t), 0.0)
    return out


def profile_d1(s):
    """dF/ds. Chain rule with g(s) = 1 - 1/(1-s): g' = -(1-s)^-2."""
    s = np.asarray(s, dtype=float)
    inside = s < 1.0
    t = np.where(inside, 1.0 - s, 1.0)
    f = np.where(inside, np.exp(1.0 - 1.0 / t), 0.0)
    return np.where(inside, -f / t**2, 0.0)


def profile_d2(s):
    s = np.asarray(s, dtype=float)
    inside = s < 1.0
    t = np.where(inside, 1.0 - s, 1.0)
    f = np.where(inside, np.exp(1.0 - 1.0 / t), 0.0)
    g1 = -1.0 / t**2
    g2 = -2.0 / t**3
    return np.where(inside, f * (g1 * g1 + g2), 0.0)


def profile_d3(s):
    s = np.asarray(s, dtype=float)
    inside = s < 1.0
    t = np.where(inside, 1.0 - s, 1.0)
    f = np.where(inside, np.exp(1.0 - 1.0 / t), 0.0)
    g1 = -1.0 / t**2
    g2 = -2.0 / t**3
    g3 = -6.0 / t**4
    return np.where(inside, f * (g1**3 + 3.0 * g1 * g2 + g3), 0.0)


def bump_value(x, center, rho, amplitude=1.0):
    """amplitude * F(|x-c|^2/rho^2) at complex points x."""
    x = np.asarray(x, dtype=complex)
    s = np.abs(x - center) ** 2 / rho**2
    return amplitude * profile(s)


def bump_gradient(x, center, rho, amplitude=1.0):
    """Gradient (two real components as a complex number u1+i*u2)."""
    x = np.asarray(x, dtype=complex)
    d = x - center
    s = np.abs(d) ** 2 / rho**2
    fp = amplitude * profile_d1(s)
    # grad s = 2(x-c)/rho^2 as a complex vector
    return fp * 2.0 * d / rho**2


def bump_hessian(x, center, rho, amplitude=1.0):
    """Second derivatives: returns (h11, h12, h22) arrays."""
    x = np.asarray(x, dtype=complex)
    d = x - center
    p1 = 2.0 * d.real / rho**2
    p2 = 2.0 * d.imag / rho**2
    q = 2.0 / rho**2
    s = np.abs(d) ** 2 / rho**2
    f1 = amplitude * profile_d1(s)
    f2 = amplitude * profile_d2(s)
    h11 = f2 * p1 * p1 + f1 * q
    h12 = f2 * p1 * p2
    h22 = f2 * p2 * p2 + f1 * q
    return h11, h12, h22


def bump_third(x, center, rho, amplitude=1.0):
    """Third derivatives d_ijk as a dict keyed by sorted index tuples."""
    x = np.asarray(x, dtype=complex)
    d = x - center
    p = (2.0 * d.real / rho**2, 2.0 * d.imag / rho**2)
    q = 2.0 / rho**2
    s = np.abs(d) ** 2 / rho**2
    f2 = amplitude * profile_d2(s)
    f3 = amplitude * profile_d3(s)
    out = {}
    for idx in ((1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2)):
        i, j, k = idx
        pi, pj, pk = p[i - 1], p[j - 1], p[k - 1]
        term = f3 * pi * pj * pk
        term = term + f2 * q * (
            (1.0 if i == j else 0.0) * pk
            + (1.0 if i == k else 0.0) * pj
            + (1.0 if j == k else 0.0) * pi
        )
        out[idx] = term
    return out


def window_value(t, t_center, t_rho):
    """Smooth time window F(((t-tc)/trho)^2); support (tc-trho, tc+trho)."""
    s = ((np.asarray(t, dtype=float) - t_center) / t_rho) ** 2
    return profile(s)


def window_derivative(t, t_center, t_rho):
    t = np.asarray(t, dtype=float)
    s = ((t - t_center) / t_rho) ** 2
    return profile_d1(s) * 2.0 * (t - t_center) / t_rho**2
