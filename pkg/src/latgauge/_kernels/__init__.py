"""Heat-bath sweep kernels: compiled Cython core with a pure-Python fallback.

Both implementations consume the same precomputed tables and the same
per-sweep block of uniforms, and perform float operations in the same
order, so their sample streams are bit-identical. Selection happens at
import time; set ``LATGAUGE_KERNEL=python`` to force the fallback.
"""

import os

from . import heatbath_py

try:
    from . import _heatbath_cy

    _HAVE_COMPILED = True
except ImportError:
    _heatbath_cy = None
    _HAVE_COMPILED = False

# The compiled kernel uses a fixed-size stack buffer for the per-element
# weights; groups beyond this order fall back to Python.
COMPILED_MAX_ORDER = 64


def get_sweep(implementation: str | None = None):
    """Return (sweep function, implementation name)."""
    if implementation == "python":
        return heatbath_py.sweep, "python"
    if implementation == "cython":
        if not _HAVE_COMPILED:
            raise RuntimeError("compiled kernel is not available in this build")
        return _heatbath_cy.sweep, "cython"
    if implementation is None:
        if os.environ.get("LATGAUGE_KERNEL", "").lower() == "python":
            return heatbath_py.sweep, "python"
        if _HAVE_COMPILED:
            return _heatbath_cy.sweep, "cython"
        return heatbath_py.sweep, "python"
    raise ValueError(f"unknown kernel implementation {implementation!r}")


sweep, IMPLEMENTATION = get_sweep()
