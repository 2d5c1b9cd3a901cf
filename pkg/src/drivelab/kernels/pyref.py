"""Pure-NumPy reference implementations of the hot geometry kernels.

These are the fallback backend when the compiled extension is unavailable
(see :mod:`drivelab.kernels`). The compiled twin in ``_native.pyx`` follows
the same arithmetic so both backends agree to floating-point noise; the
parity suite in ``tests/test_kernels.py`` enforces this.

Shapes use float64 throughout. An oriented rectangle is encoded as the
5-vector ``(cx, cy, heading, length, width)``.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Crossing-number test for a batch of points against a simple polygon.

    Args:
        points: (N, 2) query points.
        polygon: (V, 2) polygon vertices, implicitly closed.

    Returns:
        (N,) boolean array, True where the point lies inside.
    """
    points = np.asarray(points, dtype=np.float64)
    polygon = np.asarray(polygon, dtype=np.float64)
    x = points[:, 0:1]
    y = points[:, 1:2]
    x0 = polygon[None, :, 0]
    y0 = polygon[None, :, 1]
    x1 = np.roll(polygon[:, 0], -1)[None, :]
    y1 = np.roll(polygon[:, 1], -1)[None, :]
    crosses = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_int = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = crosses & (x < x_int)
    return (np.count_nonzero(hits, axis=1) % 2).astype(bool)


def _rect_corners_batch(rects: np.ndarray) -> np.ndarray:
    """Corners of oriented rectangles, (..., 5) -> (..., 4, 2).

    Corner order is fixed: front-left, front-right, rear-right, rear-left.
    """
    rects = np.asarray(rects, dtype=np.float64)
    cx, cy, h, length, width = (rects[..., i] for i in range(5))
    hl = 0.5 * length
    hw = 0.5 * width
    ch = np.cos(h)
    sh = np.sin(h)
    lx = np.stack([hl, hl, -hl, -hl], axis=-1)
    ly = np.stack([hw, -hw, -hw, hw], axis=-1)
    x = cx[..., None] + ch[..., None] * lx - sh[..., None] * ly
    y = cy[..., None] + sh[..., None] * lx + ch[..., None] * ly
    return np.stack([x, y], axis=-1)


def _project_interval(corners: np.ndarray, axis: np.ndarray) -> tuple[float, float]:
    proj = corners @ axis
    return proj.min(), proj.max()


def rects_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    """Separating-axis overlap test for two oriented rectangles.

    Touching boundaries (zero-area intersection) does not count as overlap.
    """
    ca = _rect_corners_batch(np.asarray(a, dtype=np.float64))
    cb = _rect_corners_batch(np.asarray(b, dtype=np.float64))
    for rect in (a, b):
        h = float(rect[2])
        for axis in (np.array([np.cos(h), np.sin(h)]), np.array([-np.sin(h), np.cos(h)])):
            a_lo, a_hi = _project_interval(ca, axis)
            b_lo, b_hi = _project_interval(cb, axis)
            if a_hi <= b_lo or b_hi <= a_lo:
                return False
    return True


def first_rect_overlap(ego: np.ndarray, others: np.ndarray) -> int:
    """Index of the first rectangle in ``others`` overlapping ``ego``, else -1."""
    others = np.asarray(others, dtype=np.float64)
    for i in range(others.shape[0]):
        if rects_overlap(ego, others[i]):
            return i
    return -1


def corner_distance_sums(
    cand: np.ndarray,
    expert: np.ndarray,
    weights: np.ndarray,
    length: float,
    width: float,
) -> np.ndarray:
    """Weighted four-corner distance sums between candidate and expert poses.

    Args:
        cand: (K, H, 3) candidate poses (x, y, heading) per step.
        expert: (H, 3) expert poses.
        weights: (H,) nonnegative step weights.
        length, width: footprint dimensions shared by both rectangles.

    Returns:
        (K,) unnormalized sums ``sum_h w_h * mean_corner_distance_h``.
    """
    cand = np.asarray(cand, dtype=np.float64)
    expert = np.asarray(expert, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    dims = np.array([length, width], dtype=np.float64)
    cand_rects = np.concatenate(
        [cand, np.broadcast_to(dims, cand.shape[:-1] + (2,))], axis=-1
    )
    exp_rects = np.concatenate(
        [expert, np.broadcast_to(dims, expert.shape[:-1] + (2,))], axis=-1
    )
    cc = _rect_corners_batch(cand_rects)  # (K, H, 4, 2)
    ce = _rect_corners_batch(exp_rects)  # (H, 4, 2)
    gaps = np.linalg.norm(cc - ce[None], axis=-1).mean(axis=-1)  # (K, H)
    return gaps @ weights


def state_distance_sums(
    cand: np.ndarray,
    expert: np.ndarray,
    weights: np.ndarray,
    comp_weights: np.ndarray,
) -> np.ndarray:
    """Weighted center-point state distance sums.

    Per-step distance is ``sqrt(wp*|dpos|^2 + wh*wrap(dheading)^2 + wv*dspeed^2)``
    with ``comp_weights = (wp, wh, wv)``.

    Args:
        cand: (K, H, 4) candidate states (x, y, heading, speed).
        expert: (H, 4) expert states.
        weights: (H,) step weights.
        comp_weights: (3,) component weights.

    Returns:
        (K,) unnormalized sums over steps.
    """
    cand = np.asarray(cand, dtype=np.float64)
    expert = np.asarray(expert, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    wp, wh, wv = (float(w) for w in comp_weights)
    dpos2 = (cand[..., 0] - expert[None, :, 0]) ** 2 + (cand[..., 1] - expert[None, :, 1]) ** 2
    dh = cand[..., 2] - expert[None, :, 2]
    dh = np.mod(dh + np.pi, TWO_PI) - np.pi
    dv = cand[..., 3] - expert[None, :, 3]
    step = np.sqrt(wp * dpos2 + wh * dh * dh + wv * dv * dv)
    return step @ weights


def polyline_nearest(points: np.ndarray, line: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project points onto a polyline.

    Args:
        points: (N, 2) query points.
        line: (V, 2) polyline vertices, V >= 2.

    Returns:
        Tuple of (N,) distances to the nearest polyline point and (N,)
        arclength coordinates of the projection along the line.
    """
    points = np.asarray(points, dtype=np.float64)
    line = np.asarray(line, dtype=np.float64)
    seg_a = line[:-1]  # (S, 2)
    seg_d = line[1:] - seg_a
    seg_len2 = np.maximum((seg_d * seg_d).sum(axis=1), 1e-300)
    rel = points[:, None, :] - seg_a[None]  # (N, S, 2)
    t = (rel * seg_d[None]).sum(axis=2) / seg_len2[None]
    t = np.clip(t, 0.0, 1.0)
    proj = seg_a[None] + t[..., None] * seg_d[None]
    d2 = ((points[:, None, :] - proj) ** 2).sum(axis=2)
    best = np.argmin(d2, axis=1)
    n = np.arange(points.shape[0])
    cum = np.concatenate([[0.0], np.cumsum(np.sqrt((seg_d * seg_d).sum(axis=1)))])
    arclen = cum[best] + t[n, best] * np.sqrt(seg_len2[best])
    return np.sqrt(d2[n, best]), arclen
