"""Kernel selection: compiled extension if available, pure Python otherwise.

Set ``WAVETREE_PURE=1`` to force the reference kernel (used by the benchmark
and the equivalence tests).
"""

import os

from . import _reference

reference_local_search = _reference.local_search

try:
    from . import _speedups
    compiled_local_search = _speedups.local_search
except ImportError:
    _speedups = None
    compiled_local_search = None

HAVE_COMPILED = compiled_local_search is not None

if HAVE_COMPILED and os.environ.get("WAVETREE_PURE", "") not in ("", "0"):
    local_search = reference_local_search
    ACTIVE = "reference"
elif HAVE_COMPILED:
    local_search = compiled_local_search
    ACTIVE = "compiled"
else:
    local_search = reference_local_search
    ACTIVE = "reference"

__all__ = [
    "local_search",
    "compiled_local_search",
    "reference_local_search",
    "HAVE_COMPILED",
    "ACTIVE",
]
