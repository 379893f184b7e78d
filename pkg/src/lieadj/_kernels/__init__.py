"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; setting
LIEADJ_PURE_PYTHON=1 forces the numpy fallback. `set_backend` exists for
benchmarks and tests that compare the two implementations; it swaps a
module-level pointer and is not meant to be called concurrently.
"""

import os

from . import py as _py

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None

if os.environ.get("LIEADJ_PURE_PYTHON"):
    _impl = _py
else:
    _impl = _compiled if _compiled is not None else _py


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.append("cython")
    return names


def set_backend(name):
    """Select the kernel implementation by name ('python' or 'cython')."""
    global _impl
    if name == "python":
        _impl = _py
    elif name == "cython":
        if _compiled is None:
            raise ValueError("compiled kernel extension is not available")
        _impl = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def backend_name():
    return _impl.BACKEND


def expm(a, order=12):
    return _impl.expm(a, order)


def logm(a, max_sqrts=40):
    return _impl.logm(a, max_sqrts)


def dexp_series(ad, order=12):
    return _impl.dexp_series(ad, order)


def expm_stack(a, order=12):
    return _impl.expm_stack(a, order)


def dexp_series_stack(ad, order=12):
    return _impl.dexp_series_stack(ad, order)
