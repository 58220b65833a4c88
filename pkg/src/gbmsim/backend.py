"""Selects the compiled kernels when available, the numpy fallback otherwise.

Set ``GBMSIM_BACKEND=python`` to force the fallback (used by the equivalence
tests and the kernel benchmark); ``GBMSIM_BACKEND=compiled`` raises if the
extension is missing instead of silently degrading.
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("GBMSIM_BACKEND", "auto").lower()

if _requested == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "GBMSIM_BACKEND=compiled but the gbmsim._kernels extension "
                "is not built; reinstall the package or use the python backend"
            )
        _impl = _kernels_py

BACKEND = _impl.BACKEND_NAME

laplacian = _impl.laplacian
helmholtz_apply = _impl.helmholtz_apply
helmholtz_cg = _impl.helmholtz_cg
reaction_rates = _impl.reaction_rates
ode_integrate = _impl.ode_integrate


def implementations():
    """(name, module) pairs of every available kernel implementation."""
    impls = [("python", _kernels_py)]
    try:
        from . import _kernels
        impls.append(("compiled", _kernels))
    except ImportError:
        pass
    return impls
