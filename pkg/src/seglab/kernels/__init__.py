"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the NumPy
implementation is the fallback. ``SEGLAB_PURE_PYTHON=1`` forces the fallback
(useful for benchmarking and for environments without a compiler). Both
backends produce identical partitions; see tests/test_kernels.py.
"""

from __future__ import annotations

import os

from . import pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built; NumPy twin takes over
    _ckernels = None

if os.environ.get("SEGLAB_PURE_PYTHON", "") not in ("", "0"):
    active = pykernels
else:
    active = _ckernels if _ckernels is not None else pykernels

BACKEND = active.NAME


def available_backends() -> list[str]:
    names = ["python"]
    if _ckernels is not None:
        names.insert(0, "c")
    return names


def get_backend(name: str | None = None):
    """Return a kernel module by name; ``None`` means the active default."""
    if name is None:
        return active
    if name == "python":
        return pykernels
    if name == "c":
        if _ckernels is None:
            raise RuntimeError("compiled kernel backend is not available")
        return _ckernels
    raise ValueError(f"unknown kernel backend: {name!r}")
