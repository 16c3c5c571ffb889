"""Kernel selection: compiled extension when available, pure Python otherwise.

Set FEPSIM_FORCE_PYTHON=1 in the environment to force the fallback (useful
for benchmarking and cross-implementation tests).  Both implementations
consume random variates identically, so results do not depend on which one
is active, only speed does.
"""

from __future__ import annotations

import os

from . import _pykernels
from ._rand import RAND_BLOCK, UniformStream  # noqa: F401  (re-exported)

if os.environ.get("FEPSIM_FORCE_PYTHON"):
    _impl = _pykernels
    HAVE_COMPILED = False
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        _impl = _pykernels
        HAVE_COMPILED = False

IMPLEMENTATION = _impl.IMPLEMENTATION

STATUS_TIME = _pykernels.STATUS_TIME
STATUS_FROZEN = _pykernels.STATUS_FROZEN
STATUS_HIT = _pykernels.STATUS_HIT
STATUS_FULL = _pykernels.STATUS_FULL
STATUS_STOPPED = _pykernels.STATUS_STOPPED

MODE_SZR = _pykernels.MODE_SZR
MODE_FZR = _pykernels.MODE_FZR
MODE_IRW = _pykernels.MODE_IRW

FepState = _pykernels.FepState

fep_run = _impl.fep_run
zr_segment_run = _impl.zr_segment_run
