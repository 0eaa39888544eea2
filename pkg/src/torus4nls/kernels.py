"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used. ``TORUS4NLS_BACKEND=numpy|cython`` forces a choice
(forcing ``cython`` raises if the extension was never built). Both backends
implement the same five functions and agree to round-off; parity is covered
by the test suite and timed by ``benchmarks/bench_backends.py``.
"""

import os

from . import _kernels_np

_FORCED = os.environ.get("TORUS4NLS_BACKEND", "").strip().lower()

if _FORCED == "numpy":
    _impl = _kernels_np
elif _FORCED == "cython":
    from . import _kernels_cy as _impl  # noqa: F401  (ImportError is the contract)
else:
    try:
        from . import _kernels_cy as _impl
    except ImportError:
        _impl = _kernels_np

BACKEND = _impl.BACKEND_NAME

semigroup_factors = _impl.semigroup_factors
apply_multiplier = _impl.apply_multiplier
nonlinear_combine = _impl.nonlinear_combine
weighted_norm_sq = _impl.weighted_norm_sq
weighted_diff_norm_sq = _impl.weighted_diff_norm_sq


def available_backends():
    names = ["numpy"]
    try:
        from . import _kernels_cy  # noqa: F401
    except ImportError:
        pass
    else:
        names.append("cython")
    return names


def get_backend(name):
    """Return the raw kernel module for ``name`` ('numpy' or 'cython')."""
    if name == "numpy":
        return _kernels_np
    if name == "cython":
        from . import _kernels_cy

        return _kernels_cy
    raise ValueError(f"unknown kernel backend {name!r}")


_KERNEL_NAMES = (
    "semigroup_factors",
    "apply_multiplier",
    "nonlinear_combine",
    "weighted_norm_sq",
    "weighted_diff_norm_sq",
)


def use_backend(name):
    """Rebind the module-level kernels to ``name`` (benchmarking hook).

    Callers holding cached results derived from kernel output (e.g. the
    semigroup-factor cache in ``dynamics``) must invalidate them after a
    switch.
    """
    impl = get_backend(name)
    for fn in _KERNEL_NAMES:
        globals()[fn] = getattr(impl, fn)
    global BACKEND
    BACKEND = impl.BACKEND_NAME
