"""Backend selection for the iterative kernels.

The compiled Cython extension is used when present; set
``CAS_LIMITS_BACKEND=python`` to force the NumPy fallback (used by the
benchmark and the backend-parity tests).
"""

import os

from . import _kernels_py

if os.environ.get("CAS_LIMITS_BACKEND", "").lower() == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

ba_capacity = _impl.ba_capacity
ba_rate_distortion = _impl.ba_rate_distortion

BACKEND = "cython" if _impl is not _kernels_py else "python"
