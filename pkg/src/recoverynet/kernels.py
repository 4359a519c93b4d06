"""Kernel backend selection.

The compiled Cython kernel is preferred; the numpy fallback is used when the
extension was not built. RECOVERY_NET_KERNEL=python|cython forces a backend
(mainly for benchmarking and debugging).
"""

import os

_requested = os.environ.get("RECOVERY_NET_KERNEL", "auto").lower()

if _requested == "python":
    from recoverynet import _kernels_py as _backend

    BACKEND = "python"
else:
    try:
        from recoverynet import _kernels as _backend

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from recoverynet import _kernels_py as _backend

        BACKEND = "python"

run_cascade = _backend.run_cascade
