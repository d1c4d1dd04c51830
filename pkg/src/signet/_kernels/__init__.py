"""Kernel backend selection.

The hot numerical loops (matrix exponentials, interval products, quadrature
accumulation) exist twice: a compiled Cython extension (``_core``) and a pure
numpy fallback (``_fallback``) with identical signatures and semantics. The
compiled one is preferred when present; set ``SIGNET_PURE_PYTHON=1`` to force
the fallback, e.g. to compare the two.
"""

import os

from . import _fallback

if os.environ.get("SIGNET_PURE_PYTHON", "") in ("1", "true", "yes"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

expm = _impl.expm
chain_product = _impl.chain_product
forward_states = _impl.forward_states
backward_states = _impl.backward_states
series_levels = _impl.series_levels
trapezoid_triple = _impl.trapezoid_triple


def backends():
    """Return the available backend modules keyed by name."""
    found = {"python": _fallback}
    try:
        from . import _core

        found["compiled"] = _core
    except ImportError:
        pass
    return found
