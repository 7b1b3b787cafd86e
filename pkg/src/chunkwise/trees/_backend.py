"""Selects the compiled split kernels when available, else the numpy fallback.

Set ``CHUNKWISE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

pure = _pykernels

if os.environ.get("CHUNKWISE_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _splitkern as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"
