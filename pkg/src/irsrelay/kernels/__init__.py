"""Hot-loop kernels with a compiled core and a NumPy fallback.

The Cython extension is preferred when it built; otherwise the pure-NumPy
twin is used.  Set IRSRELAY_FORCE_BACKEND=python (or =compiled) to pin the
choice, e.g. for benchmarking the two against each other.
"""

import os

_force = os.environ.get("IRSRELAY_FORCE_BACKEND", "")
if _force not in ("", "compiled", "python"):
    raise RuntimeError(f"IRSRELAY_FORCE_BACKEND must be 'compiled' or 'python', got {_force!r}")

backend = "python"
if _force != "python":
    try:
        from ._search import search_bilinear

        backend = "compiled"
    except ImportError:
        if _force == "compiled":
            raise
if backend == "python":
    from ._pykernels import search_bilinear

__all__ = ["search_bilinear", "backend"]
