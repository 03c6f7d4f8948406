"""Kernel selection: compiled extension when importable, else pure Python.

Set ``LENGTHLAB_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
floyd_warshall = _kernels_py.floyd_warshall
gh_search = _kernels_py.gh_search
INF = _kernels_py.INF

if not os.environ.get("LENGTHLAB_PURE"):
    try:
        from . import _kernels as _ext
    except ImportError:  # pragma: no cover - depends on build
        _ext = None
    if _ext is not None:
        BACKEND = "compiled"
        floyd_warshall = _ext.floyd_warshall
        gh_search = _ext.gh_search

__all__ = ["BACKEND", "INF", "floyd_warshall", "gh_search"]
