"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting ``IPRW_PURE_PYTHON=1``
forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("IPRW_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
        BACKEND = "python"

advance = _impl.advance
causal_conv = _impl.causal_conv
renewal_solve = _impl.renewal_solve

DONE = _fallback.DONE
NEED_DRAWS = _fallback.NEED_DRAWS
NEED_SPACE = _fallback.NEED_SPACE
RUNAWAY = _fallback.RUNAWAY
