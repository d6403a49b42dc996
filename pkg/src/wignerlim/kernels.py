"""Kernel backend selection.

The compiled extension is used when it imports; otherwise (or when the
environment variable ``WIGNER_PURE_PYTHON`` is set to a non-empty value
other than ``0``) the numpy implementation is used.
"""

from __future__ import annotations

import os

from . import _kernels_py

__all__ = ["BACKEND", "cube_shell_sums", "compensated_cumsum", "get_backend"]


def _want_pure() -> bool:
    return os.environ.get("WIGNER_PURE_PYTHON", "") not in ("", "0")


def get_backend(name: str | None = None):
    """Return the kernel module: ``"compiled"``, ``"python"`` or None for automatic."""
    if name == "python" or (name is None and _want_pure()):
        return _kernels_py
    try:
        from . import _kernels
    except ImportError:
        if name == "compiled":
            raise
        return _kernels_py
    return _kernels


_impl = get_backend()
BACKEND = "python" if _impl is _kernels_py else "compiled"
cube_shell_sums = _impl.cube_shell_sums
compensated_cumsum = _impl.compensated_cumsum
