"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled core (``commdet._speedups``) is used when importable; set
``COMMUNITY_DETECT_KERNEL=py`` to force the pure-Python fallback or
``COMMUNITY_DETECT_KERNEL=c`` to require the extension.  Both backends are
drop-in equivalents producing bit-identical results.
"""

from __future__ import annotations

import os

from . import _kernels_py


def _load(name: str):
    if name in ("py", "python", "pure"):
        return _kernels_py, "python"
    try:
        from . import _speedups
        return _speedups, "c"
    except ImportError:
        if name == "c":
            raise ImportError(
                "COMMUNITY_DETECT_KERNEL=c but commdet._speedups is not built"
            ) from None
        return _kernels_py, "python"


def get_backend(name: str | None = None):
    """Return ``(module, label)`` for an explicit backend choice."""
    return _load((name or "").strip().lower())


_impl, BACKEND = _load(os.environ.get("COMMUNITY_DETECT_KERNEL", "").strip().lower())

sweep_nodes = _impl.sweep_nodes
queue_moves = _impl.queue_moves
refine_level = _impl.refine_level
