"""Kernel backend selection.

The hot inner loops (proportional scaling, confidence diffusion, wavelet
fusion, soft-NMS, run extraction) exist twice: a compiled Cython extension
(``tfloc._native``) and a pure-NumPy fallback (``tfloc._kernels_py``). The
backend is picked once at import time:

* ``TFLOC_BACKEND=c``       require the compiled extension, fail otherwise
* ``TFLOC_BACKEND=python``  force the NumPy fallback
* unset / ``auto``          use the extension when importable

Both backends implement identical semantics; results agree to floating
point roundoff.
"""

from __future__ import annotations

import os

from tfloc import _kernels_py

_choice = os.environ.get("TFLOC_BACKEND", "auto").lower()

if _choice not in ("auto", "c", "python"):
    raise RuntimeError(f"TFLOC_BACKEND must be 'auto', 'c', or 'python', got {_choice!r}")

if _choice == "python":
    _impl = _kernels_py
else:
    try:
        from tfloc import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "c":
            raise RuntimeError(
                "TFLOC_BACKEND=c but the compiled extension tfloc._native is "
                "not available; build it with 'pip install -e .'"
            ) from None
        _impl = _kernels_py

BACKEND_NAME: str = _impl.BACKEND_NAME

ips_iterate = _impl.ips_iterate
ips_stats = _kernels_py.ips_stats  # diagnostics only, always NumPy
diffuse_power = _impl.diffuse_power
fuse_wavelets = _impl.fuse_wavelets
threshold_runs = _impl.threshold_runs
soft_nms_order = _impl.soft_nms_order


def backend_name() -> str:
    """Name of the active kernel backend ('c' or 'python')."""
    return BACKEND_NAME
