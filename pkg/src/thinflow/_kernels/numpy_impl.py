"""Pure-numpy implementations of the hot kernels.

Shapes follow a batch-of-systems convention: tridiagonal solvers take
(m, n) arrays holding m independent systems of size n.  These are the
reference semantics; the numba twins in numba_impl.py must agree to
rounding.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def thomas_batch(lower, diag, upper, rhs):
    """Solve m tridiagonal systems stacked row-wise.

    lower[:, 0] and upper[:, -1] are ignored.  No pivoting: callers supply
    diagonally dominant systems (Poisson/diffusion stencils are).
    """
    m, n = diag.shape
    c = np.empty_like(rhs)
    d = np.empty_like(rhs)
    x = np.empty_like(rhs)
    c[:, 0] = upper[:, 0] / diag[:, 0]
    d[:, 0] = rhs[:, 0] / diag[:, 0]
    for i in range(1, n):
        den = diag[:, i] - lower[:, i] * c[:, i - 1]
        c[:, i] = upper[:, i] / den
        d[:, i] = (rhs[:, i] - lower[:, i] * d[:, i - 1]) / den
    x[:, -1] = d[:, -1]
    for i in range(n - 2, -1, -1):
        x[:, i] = d[:, i] - c[:, i] * x[:, i + 1]
    return x


def cyclic_thomas_batch(lower, diag, upper, rhs):
    """Solve m periodic tridiagonal systems via Sherman-Morrison.

    Row i couples x[i-1], x[i], x[i+1] with wraparound: lower[:, 0]
    multiplies x[n-1] and upper[:, -1] multiplies x[0].  Needs n >= 3.
    """
    m, n = diag.shape
    gamma = -diag[:, 0]
    dmod = diag.copy()
    dmod[:, 0] = diag[:, 0] - gamma
    dmod[:, -1] = diag[:, -1] - lower[:, 0] * upper[:, -1] / gamma
    y = thomas_batch(lower, dmod, upper, rhs)
    u = np.zeros_like(rhs)
    u[:, 0] = gamma
    u[:, -1] = upper[:, -1]
    z = thomas_batch(lower, dmod, upper, u)
    num = y[:, 0] + lower[:, 0] * y[:, -1] / gamma
    den = 1.0 + z[:, 0] + lower[:, 0] * z[:, -1] / gamma
    return y - z * (num / den)[:, None]


def arakawa_jacobian(psi, w, dsig, dth):
    """Energy/enstrophy-conserving 9-point Jacobian d(psi,w)/d(sigma,theta).

    First axis is sigma (rows 0 and -1 left zero; callers hold boundary
    values there), second axis is theta, periodic.
    """
    pp = np.roll(psi, -1, axis=1)  # theta + 1
    pm = np.roll(psi, 1, axis=1)
    wp = np.roll(w, -1, axis=1)
    wm = np.roll(w, 1, axis=1)
    out = np.zeros_like(w)

    j1 = (psi[2:, :] - psi[:-2, :]) * (wp[1:-1, :] - wm[1:-1, :]) - (
        pp[1:-1, :] - pm[1:-1, :]
    ) * (w[2:, :] - w[:-2, :])
    j2 = (
        psi[2:, :] * (wp[2:, :] - wm[2:, :])
        - psi[:-2, :] * (wp[:-2, :] - wm[:-2, :])
        - pp[1:-1, :] * (wp[2:, :] - wp[:-2, :])
        + pm[1:-1, :] * (wm[2:, :] - wm[:-2, :])
    )
    j3 = (
        pp[2:, :] * (wp[1:-1, :] - w[2:, :])
        - pm[:-2, :] * (w[:-2, :] - wm[1:-1, :])
        - pp[:-2, :] * (wp[1:-1, :] - w[:-2, :])
        + pm[2:, :] * (w[2:, :] - wm[1:-1, :])
    )
    out[1:-1, :] = (j1 + j2 + j3) / (12.0 * dsig * dth)
    return out


def upwind_tendency(w, vsig, vth, dsig, dth):
    """First-order upwind advection tendency -(vsig w_sig + vth w_th).

    Boundary rows are left zero.  Diagnostic alternative to the Arakawa
    scheme; never the default.
    """
    out = np.zeros_like(w)
    dws_m = (w[1:-1, :] - w[:-2, :]) / dsig
    dws_p = (w[2:, :] - w[1:-1, :]) / dsig
    wp = np.roll(w, -1, axis=1)
    wm = np.roll(w, 1, axis=1)
    dwt_m = (w[1:-1, :] - wm[1:-1, :]) / dth
    dwt_p = (wp[1:-1, :] - w[1:-1, :]) / dth
    vs = vsig[1:-1, :]
    vt = vth[1:-1, :]
    out[1:-1, :] = -(
        np.where(vs > 0.0, vs * dws_m, vs * dws_p)
        + np.where(vt > 0.0, vt * dwt_m, vt * dwt_p)
    )
    return out


def biot_savart_sum(tmap, ctp, src, src_img, wts):
    """Velocity at mapped targets induced by weighted sources and their images.

    tmap:    T(x) at the targets (complex)
    ctp:     conj(T'(x)) at the targets (complex)
    src:     T(y) at quadrature nodes (complex)
    src_img: image points T(y)/|T(y)|^2 (complex)
    wts:     quadrature weight times vorticity value (real)

    Returns the complex velocities (1/2pi) ctp * i * sum_q wts_q *
    (1/conj(tmap - src_q) - 1/conj(tmap - src_img_q)).
    """
    out = np.empty(tmap.shape[0], dtype=np.complex128)
    nsrc = max(src.shape[0], 1)
    chunk = max(1, 4_000_000 // nsrc)
    for i0 in range(0, tmap.shape[0], chunk):
        x = tmap[i0 : i0 + chunk, None]
        acc = (wts / np.conj(x - src)).sum(axis=1)
        acc -= (wts / np.conj(x - src_img)).sum(axis=1)
        out[i0 : i0 + chunk] = acc
    return out * (1j / TWO_PI) * ctp
