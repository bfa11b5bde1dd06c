"""Kernel selection: the compiled module when it was built, numpy otherwise.

Set ``ANOSOV_TRIANGLE_PURE=1`` to force the numpy versions.  ``BACKEND``
names the one in use.
"""

from __future__ import annotations

import os

from . import _kernels_py

_impl = _kernels_py
BACKEND = "python"
if os.environ.get("ANOSOV_TRIANGLE_PURE", "") in ("", "0"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

max_angle = _impl.max_angle
chain_product = _impl.chain_product
box_chain = _impl.box_chain

__all__ = ["BACKEND", "box_chain", "chain_product", "max_angle"]
