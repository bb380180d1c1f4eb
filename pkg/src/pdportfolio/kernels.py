"""Backend selection for the elementwise prox kernels.

The compiled extension ``_kernels`` is used when it was built; otherwise the
NumPy module ``_kernels_py`` is loaded. Setting ``PDPORTFOLIO_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("PDPORTFOLIO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        _impl = _compiled

prox_piecewise_linear = _impl.prox_piecewise_linear
prox_halfline = _impl.prox_halfline
prox_quadratic = _impl.prox_quadratic
prox_logarithmic = _impl.prox_logarithmic
prox_exponential = _impl.prox_exponential


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        found["cython"] = _compiled
    return found
