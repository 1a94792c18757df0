"""Backend selection for the hot kernels.

The compiled ``_core`` extension is used when it imports; otherwise the
numpy fallback in ``_core_py``.  Setting ``PAVETEX_PURE_PYTHON=1`` forces
the fallback.
"""
import os

from . import _core_py

if os.environ.get("PAVETEX_PURE_PYTHON", "") not in ("", "0"):
    _impl = _core_py
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _core_py

BACKEND = "cython" if _impl is not _core_py else "python"

watershed_flood = _impl.watershed_flood
bilateral = _impl.bilateral
best_split = _impl.best_split


def available_backends():
    """Map of backend name to kernel module for every importable backend."""
    found = {"python": _core_py}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        found["cython"] = _core
    return found
