"""Numba twins of the kernels in numpy_impl.py.

Compiled with cache=True so the cost is paid once per environment, and
without fastmath so both backends agree to rounding.  Parallel loops only
range over independent outputs (one system, one target, one row), which
keeps results deterministic under any thread schedule.
"""

import numpy as np
from numba import njit, prange

TWO_PI = 2.0 * np.pi


@njit(cache=True, parallel=True)
def thomas_batch(lower, diag, upper, rhs):
    m, n = diag.shape
    x = np.empty_like(rhs)
    for s in prange(m):
        c = np.empty(n, rhs.dtype)
        d = np.empty(n, rhs.dtype)
        c[0] = upper[s, 0] / diag[s, 0]
        d[0] = rhs[s, 0] / diag[s, 0]
        for i in range(1, n):
            den = diag[s, i] - lower[s, i] * c[i - 1]
            c[i] = upper[s, i] / den
            d[i] = (rhs[s, i] - lower[s, i] * d[i - 1]) / den
        x[s, n - 1] = d[n - 1]
        for i in range(n - 2, -1, -1):
            x[s, i] = d[i] - c[i] * x[s, i + 1]
    return x


@njit(cache=True, parallel=True)
def cyclic_thomas_batch(lower, diag, upper, rhs):
    m, n = diag.shape
    x = np.empty_like(rhs)
    for s in prange(m):
        gamma = -diag[s, 0]
        dm = np.empty(n, rhs.dtype)
        for i in range(n):
            dm[i] = diag[s, i]
        dm[0] = diag[s, 0] - gamma
        dm[n - 1] = diag[s, n - 1] - lower[s, 0] * upper[s, n - 1] / gamma

        # two Thomas sweeps against the modified diagonal
        c = np.empty(n, rhs.dtype)
        y = np.empty(n, rhs.dtype)
        z = np.empty(n, rhs.dtype)
        u = np.zeros(n, rhs.dtype)
        u[0] = gamma
        u[n - 1] = upper[s, n - 1]

        c[0] = upper[s, 0] / dm[0]
        y[0] = rhs[s, 0] / dm[0]
        z[0] = u[0] / dm[0]
        for i in range(1, n):
            den = dm[i] - lower[s, i] * c[i - 1]
            c[i] = upper[s, i] / den
            y[i] = (rhs[s, i] - lower[s, i] * y[i - 1]) / den
            z[i] = (u[i] - lower[s, i] * z[i - 1]) / den
        for i in range(n - 2, -1, -1):
            y[i] = y[i] - c[i] * y[i + 1]
            z[i] = z[i] - c[i] * z[i + 1]

        num = y[0] + lower[s, 0] * y[n - 1] / gamma
        den2 = 1.0 + z[0] + lower[s, 0] * z[n - 1] / gamma
        f = num / den2
        for i in range(n):
            x[s, i] = y[i] - f * z[i]
    return x


@njit(cache=True, parallel=True)
def arakawa_jacobian(psi, w, dsig, dth):
    ns, nt = w.shape
    out = np.zeros_like(w)
    scale = 1.0 / (12.0 * dsig * dth)
    for i in prange(1, ns - 1):
        for j in range(nt):
            jp = j + 1 if j + 1 < nt else 0
            jm = j - 1 if j - 1 >= 0 else nt - 1
            j1 = (psi[i + 1, j] - psi[i - 1, j]) * (w[i, jp] - w[i, jm]) - (
                psi[i, jp] - psi[i, jm]
            ) * (w[i + 1, j] - w[i - 1, j])
            j2 = (
                psi[i + 1, j] * (w[i + 1, jp] - w[i + 1, jm])
                - psi[i - 1, j] * (w[i - 1, jp] - w[i - 1, jm])
                - psi[i, jp] * (w[i + 1, jp] - w[i - 1, jp])
                + psi[i, jm] * (w[i + 1, jm] - w[i - 1, jm])
            )
            j3 = (
                psi[i + 1, jp] * (w[i, jp] - w[i + 1, j])
                - psi[i - 1, jm] * (w[i - 1, j] - w[i, jm])
                - psi[i - 1, jp] * (w[i, jp] - w[i - 1, j])
                + psi[i + 1, jm] * (w[i + 1, j] - w[i, jm])
            )
            out[i, j] = (j1 + j2 + j3) * scale
    return out


@njit(cache=True, parallel=True)
def upwind_tendency(w, vsig, vth, dsig, dth):
    ns, nt = w.shape
    out = np.zeros_like(w)
    for i in prange(1, ns - 1):
        for j in range(nt):
            jp = j + 1 if j + 1 < nt else 0
            jm = j - 1 if j - 1 >= 0 else nt - 1
            vs = vsig[i, j]
            vt = vth[i, j]
            if vs > 0.0:
                ds = (w[i, j] - w[i - 1, j]) / dsig
            else:
                ds = (w[i + 1, j] - w[i, j]) / dsig
            if vt > 0.0:
                dt = (w[i, j] - w[i, jm]) / dth
            else:
                dt = (w[i, jp] - w[i, j]) / dth
            out[i, j] = -(vs * ds + vt * dt)
    return out


@njit(cache=True, parallel=True)
def biot_savart_sum(tmap, ctp, src, src_img, wts):
    n = tmap.shape[0]
    m = src.shape[0]
    out = np.empty(n, np.complex128)
    for i in prange(n):
        x = tmap[i]
        acc = 0.0 + 0.0j
        for q in range(m):
            acc += wts[q] * (
                1.0 / np.conj(x - src[q]) - 1.0 / np.conj(x - src_img[q])
            )
        out[i] = acc * (1j / TWO_PI) * ctp[i]
    return out
