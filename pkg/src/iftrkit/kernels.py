"""Kernel backend selection.

The compiled extension is preferred.  Setting the environment variable
``IFTRKIT_PURE_PYTHON=1`` forces the numpy fallback, which is also used
automatically when the extension has not been built.

Attributes
----------
BACKEND : str
    ``"compiled"`` or ``"python"``.
"""

import os

from . import _kernels_py

_forced = os.environ.get("IFTRKIT_PURE_PYTHON", "").strip().lower() not in ("", "0", "false", "no")

if _forced:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

rician_mixture = _impl.rician_mixture
kummer_profile = _impl.kummer_profile
nondominated_ranks = _impl.nondominated_ranks
bin_lagrange = _impl.bin_lagrange

__all__ = ["BACKEND", "rician_mixture", "kummer_profile", "nondominated_ranks", "bin_lagrange"]
