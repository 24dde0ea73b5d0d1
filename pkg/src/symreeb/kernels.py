"""Backend selection for the hot kernels.

The compiled Cython module is used when it imports; otherwise, or when the
environment variable ``SYMREEB_PURE_PYTHON`` is set to ``1``, the numpy
fallback is used. ``BACKEND`` records the choice.
"""

import os

from . import _pykernels

_FORCE_PURE = os.environ.get("SYMREEB_PURE_PYTHON", "") == "1"

if _FORCE_PURE:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

VectorField = _impl.VectorField
gauss_linking_sum = _impl.gauss_linking_sum
min_pair_distance = _impl.min_pair_distance


def backends():
    """Return the available backend modules keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["compiled"] = _ckernels
    except ImportError:
        pass
    return out
