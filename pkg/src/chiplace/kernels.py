"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module. Set ``CHIPLACE_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _pykernels

if os.environ.get("CHIPLACE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

route = _impl.route
decode = _impl.decode
corners = _impl.corners
candidate_edges = _impl.candidate_edges

__all__ = ["BACKEND", "route", "decode", "corners", "candidate_edges"]
