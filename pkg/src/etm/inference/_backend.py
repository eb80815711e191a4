"""Pick the Gibbs sweep implementation.

The compiled kernel is used when it imports; set ``ETM_PURE_PYTHON=1`` to
force the fallback.
"""
import os

from . import _gibbs_py

try:
    from . import _gibbs as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNELS = {"python": _gibbs_py}
if _compiled is not None:
    KERNELS["compiled"] = _compiled

if _compiled is not None and not os.environ.get("ETM_PURE_PYTHON"):
    DEFAULT = "compiled"
else:
    DEFAULT = "python"


def get_kernel(name=None):
    name = name or DEFAULT
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable Gibbs backend {name!r}; have {sorted(KERNELS)}") from None
