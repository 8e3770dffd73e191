"""Backend selection for the hot numeric kernels.

Two implementations of every kernel exist in :mod:`rankdiv.kernels`: a numba
``@njit`` version and a pure-numpy fallback. The active one is chosen at import
time from the ``RANKDIV_BACKEND`` environment variable:

* ``auto`` (default) - numba if importable, else numpy
* ``numba``          - require numba, raise if missing
* ``numpy``          - force the pure-numpy path

``use_backend()`` switches at runtime (used by tests and the kernel benchmark).
"""

from __future__ import annotations

import os

_VALID = ("auto", "numba", "numpy")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on numba-less installs
    HAVE_NUMBA = False

_active = "numpy"


def _resolve(requested: str) -> str:
    if requested not in _VALID:
        raise ValueError(f"RANKDIV_BACKEND must be one of {_VALID}, got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        raise RuntimeError("RANKDIV_BACKEND=numba but numba is not importable")
    if requested == "auto":
        return "numba" if HAVE_NUMBA else "numpy"
    return requested


def active_backend() -> str:
    """Name of the backend currently serving the hot kernels."""
    return _active


def use_backend(name: str) -> str:
    """Switch kernel backend at runtime; returns the resolved name."""
    global _active
    _active = _resolve(name)
    return _active


use_backend(os.environ.get("RANKDIV_BACKEND", "auto"))
