"""Selection of the numeric kernel backend.

Every hot loop in the package exists twice: once as a numba @njit kernel
and once as a pure-numpy fallback with identical semantics.  The active
implementation is chosen by the THINFLOW_BACKEND environment variable:

    THINFLOW_BACKEND=numba   force the compiled kernels (error if numba missing)
    THINFLOW_BACKEND=numpy   force the vectorised fallbacks
    THINFLOW_BACKEND=auto    (default) numba when importable, numpy otherwise

`use()` switches at runtime, which the benchmark script and the
backend-agreement tests rely on.
"""

import os

_CHOICES = ("auto", "numba", "numpy")
_active = None


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _resolve(name):
    if name not in _CHOICES:
        raise ValueError(f"THINFLOW_BACKEND must be one of {_CHOICES}, got {name!r}")
    if name == "numpy":
        return "numpy"
    if name == "numba":
        if not _numba_available():
            raise RuntimeError("THINFLOW_BACKEND=numba but numba is not importable")
        return "numba"
    return "numba" if _numba_available() else "numpy"


def active_backend():
    """Name of the backend currently serving kernel calls."""
    global _active
    if _active is None:
        _active = _resolve(os.environ.get("THINFLOW_BACKEND", "auto").strip().lower())
    return _active


def use(name):
    """Programmatically select 'numba', 'numpy', or 'auto'. Returns the new name."""
    global _active
    _active = _resolve(name)
    return _active
