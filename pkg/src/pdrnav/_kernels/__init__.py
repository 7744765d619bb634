"""DP kernel backend selection.

The compiled extension is used when present; the numpy fallback otherwise.
Set PDRNAV_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the backend-equality tests).
"""

import os

from . import _dp_py

if os.environ.get("PDRNAV_PURE_PYTHON", "") == "1":
    _impl = _dp_py
else:
    try:
        from . import _dp as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _dp_py

BACKEND = _impl.BACKEND

dtw_full = _impl.dtw_full
dtw_banded = _impl.dtw_banded
frechet_full = _impl.frechet_full
frechet_banded = _impl.frechet_banded


def backends():
    """All importable backends (name -> module), for equality tests."""
    out = {"python": _dp_py}
    try:
        from . import _dp

        out["compiled"] = _dp
    except ImportError:
        pass
    return out
