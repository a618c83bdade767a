"""Select the compiled search kernels when available.

Set ``RXNGRAPH_PURE_PYTHON=1`` to force the pure-Python implementation.
"""

from __future__ import annotations

import logging
import os

log = logging.getLogger(__name__)

if os.environ.get("RXNGRAPH_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "compiled"
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using pure Python")
        from . import _pykernels as kernels

        BACKEND = "python"

Index = kernels.Index
EQUAL, INTERSECT = kernels.EQUAL, kernels.INTERSECT

__all__ = ["BACKEND", "EQUAL", "INTERSECT", "Index"]
