"""Geometry kernel backend selection.

The hot inner loops of rollout generation (candidate distance scoring,
footprint collision checks, polyline projection) are implemented twice:
once in Cython (``_native``) and once in pure NumPy (``pyref``). The
compiled backend is used when the extension built; setting the environment
variable ``DRIVELAB_PURE_PYTHON=1`` before import forces the fallback.

``benchmarks/bench_kernels.py`` compares the two on representative
workloads.
"""

from __future__ import annotations

import os

from . import pyref

if os.environ.get("DRIVELAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = pyref
    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _impl = pyref
        BACKEND = "python"

points_in_polygon = _impl.points_in_polygon
rects_overlap = _impl.rects_overlap
first_rect_overlap = _impl.first_rect_overlap
corner_distance_sums = _impl.corner_distance_sums
state_distance_sums = _impl.state_distance_sums
polyline_nearest = _impl.polyline_nearest


def backend_name() -> str:
    """Name of the active kernel backend ('native' or 'python')."""
    return BACKEND
