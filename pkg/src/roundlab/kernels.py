"""Backend selector: compiled kernels when built, pure Python otherwise.

Set ROUNDLAB_PURE_PYTHON=1 to force the fallback. Both backends expose the
same functions with identical results; tests assert parity.
"""

from __future__ import annotations

import os

if os.environ.get("ROUNDLAB_PURE_PYTHON") == "1":
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pykernels as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND

pair_census = _impl.pair_census
class_partners = _impl.class_partners
is_class_pair = _impl.is_class_pair
completion_count_r2 = _impl.completion_count_r2
simplex_count_r2 = _impl.simplex_count_r2
min_gap_scan = _impl.min_gap_scan
