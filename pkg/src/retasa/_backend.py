"""Select the pairwise-kernel backend at import time.

The compiled extension is preferred when it was built; setting the
environment variable ``RETASA_FORCE_PYTHON=1`` before import forces the
NumPy fallback (useful for debugging and for benchmarking both paths).
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("RETASA_FORCE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

gaussian_nw_matrix = _impl.gaussian_nw_matrix
epanechnikov_nw_matrix = _impl.epanechnikov_nw_matrix
gaussian_kde_values = _impl.gaussian_kde_values
epanechnikov_kde_values = _impl.epanechnikov_kde_values
