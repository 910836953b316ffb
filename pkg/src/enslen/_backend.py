"""Select the coordinate kernels at import time.

The compiled extension is used when it imports; setting ``ENSLEN_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("ENSLEN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def available_backends():
    out = {"python": _kernels_py}
    try:
        from . import _kernels as _compiled
    except ImportError:
        return out
    out["cython"] = _compiled
    return out


def herm_coords(X):
    return kernels.herm_coords(X)


def herm_coords_stack(Xs):
    return kernels.herm_coords_stack(Xs)


def sandwich_coords(L, D, R, weight):
    return kernels.sandwich_coords(L, D, R, float(weight))
