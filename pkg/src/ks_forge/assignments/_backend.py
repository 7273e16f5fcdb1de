"""Selects the compiled kernel when available.

Set ``KS_FORGE_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

import os

from . import _kernel_py

kernel = _kernel_py
BACKEND = "python"

if os.environ.get("KS_FORGE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernel_c
    except ImportError:  # extension not built
        pass
    else:
        kernel = _kernel_c
        BACKEND = "cython"
