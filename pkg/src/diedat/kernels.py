"""Backend selection for the training hot loops.

Prefers the compiled extension and falls back to the NumPy implementation
when it is unavailable. Set DIEDAT_PURE_PYTHON=1 to force the fallback.
"""

import os

if os.environ.get("DIEDAT_PURE_PYTHON"):
    from diedat import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from diedat import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from diedat import _kernels_py as _impl

        BACKEND = "python"

lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward
sgns_step = _impl.sgns_step
