"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the numpy
kernel is always available.  ``SIMPLEXSC_BACKEND=numpy`` (or ``compiled``)
forces a choice at import time, and :func:`use` switches at runtime, which
the backend-comparison benchmark and the parity tests rely on.
"""

import os

from . import _pgd_numpy

_BACKENDS = {"numpy": _pgd_numpy}

try:
    from . import _pgd_core

    _BACKENDS["compiled"] = _pgd_core
except ImportError:  # extension not built; numpy kernel takes over
    pass

_DEFAULT = "compiled" if "compiled" in _BACKENDS else "numpy"
_ACTIVE = os.environ.get("SIMPLEXSC_BACKEND", _DEFAULT)
if _ACTIVE not in _BACKENDS:
    raise ImportError(
        f"requested backend {_ACTIVE!r} unavailable; have {sorted(_BACKENDS)}"
    )


def available_backends():
    """Names of the kernel implementations that imported successfully."""
    return sorted(_BACKENDS)


def active_backend():
    """Name of the kernel currently in use."""
    return _ACTIVE


def use(name):
    """Switch the active kernel; returns the previously active name."""
    global _ACTIVE
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {sorted(_BACKENDS)}")
    previous = _ACTIVE
    _ACTIVE = name
    return previous


def simplex_project(v):
    return _BACKENDS[_ACTIVE].simplex_project(v)


def pgd_chunk(H, g, beta, step, max_iter, tol):
    return _BACKENDS[_ACTIVE].pgd_chunk(H, g, beta, step, max_iter, tol)
