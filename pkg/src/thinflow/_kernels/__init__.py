"""Backend dispatch for the hot kernels.

Call sites import this module; each wrapper forwards to the numba or the
numpy implementation according to thinflow._backend.active_backend().
The indirection costs microseconds against kernel runtimes of
milliseconds, and lets tests and benchmarks flip backends at runtime.
"""

from .. import _backend
from . import numpy_impl


def _impl():
    if _backend.active_backend() == "numba":
        from . import numba_impl

        return numba_impl
    return numpy_impl


def thomas_batch(lower, diag, upper, rhs):
    return _impl().thomas_batch(lower, diag, upper, rhs)


def cyclic_thomas_batch(lower, diag, upper, rhs):
    return _impl().cyclic_thomas_batch(lower, diag, upper, rhs)


def arakawa_jacobian(psi, w, dsig, dth):
    return _impl().arakawa_jacobian(psi, w, dsig, dth)


def upwind_tendency(w, vsig, vth, dsig, dth):
    return _impl().upwind_tendency(w, vsig, vth, dsig, dth)


def biot_savart_sum(tmap, ctp, src, src_img, wts):
    return _impl().biot_savart_sum(tmap, ctp, src, src_img, wts)
