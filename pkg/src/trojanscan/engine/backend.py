"""Kernel backend selection.

The compiled Cython extension is preferred when built; otherwise the numpy
fallback is used. ``TROJANSCAN_KERNELS=python|compiled`` forces a choice
(the benchmark uses this to compare both).
"""

from __future__ import annotations

import os

_requested = os.environ.get("TROJANSCAN_KERNELS", "auto").lower()

kernels = None
if _requested in ("auto", "compiled"):
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = None

if kernels is None:
    if _requested == "compiled":
        raise ImportError(
            "TROJANSCAN_KERNELS=compiled but the extension is not built; "
            "run `pip install -e . --no-build-isolation`"
        )
    from . import _kernels_py as kernels  # type: ignore[no-redef]


def backend_name() -> str:
    return kernels.NAME
