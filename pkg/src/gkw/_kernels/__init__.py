"""Kernel backend selection.

The compiled module is used when it imports; ``GKW_BACKEND=python`` forces the
numpy fallback. ``GKW_THREADS`` caps the OpenMP thread count of the compiled
kernels (default 1).
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = None


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; have {available_backends()}")
    _active = _BACKENDS[name]


def get_backend():
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def num_threads():
    raw = os.environ.get("GKW_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GKW_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def laplacian(f, inv_h2):
    return _active.laplacian(f, inv_h2, num_threads())


def hessian(eta, inv_h2, coef, weights):
    return _active.hessian(eta, inv_h2, coef, weights, num_threads())


_requested = os.environ.get("GKW_BACKEND", "").strip().lower()
if _requested:
    set_backend(_requested)
else:
    set_backend("cython" if _ckernels is not None else "python")
