"""Wisp annotation and shape refinement.

Two jobs live here: growing wisp masks from guide strokes (the dataset
annotation tool) and cleaning up a wisp mask before meshing (contour
smoothing plus tip sharpening). All operations are pure functions on
numpy arrays and are safe to run per-wisp in parallel.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ExtractionError

# BFS growth directions for sketch filling: up, down, right. Leaving out
# the left neighbor preserves the contour indicated by the stroke.
_FILL_STEPS = ((0, -1), (0, 1), (1, 0))

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)

DEFAULT_CONTOUR_SAMPLES = 32


@dataclass(frozen=True)
class Stroke:
    """A guide polyline roughly following a wisp from root to tip."""

    points: np.ndarray  # (N, 2) float pixel coordinates

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ExtractionError("stroke needs at least 2 (x, y) points")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class ContourPair:
    """Left/right boundary arcs of a wisp, split at its vertical extremes.

    Both arcs run from the topmost split point to the bottommost one;
    concatenating ``left`` with reversed ``right`` closes the polygon.
    """

    left: np.ndarray    # (Nl, 2) int pixel coordinates
    right: np.ndarray   # (Nr, 2) int
    top: tuple          # s_0, shared first point
    bottom: tuple       # s_e, shared last point


def rasterize_polyline(points, shape) -> np.ndarray:
    """Rasterize a polyline into a boolean mask using Bresenham segments."""
    h, w = shape
    mask = np.zeros((h, w), dtype=bool)
    pts = np.rint(np.asarray(points, dtype=np.float64)).astype(np.int64)
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        dx = abs(x1 - x0)
        dy = -abs(y1 - y0)
        sx = 1 if x0 < x1 else -1
        sy = 1 if y0 < y1 else -1
        err = dx + dy
        x, y = x0, y0
        while True:
            if 0 <= x < w and 0 <= y < h:
                mask[y, x] = True
            if x == x1 and y == y1:
                break
            e2 = 2 * err
            if e2 >= dy:
                err += dy
                x += sx
            if e2 <= dx:
                err += dx
                y += sy
    return mask


def _bfs_fill(seeds, allowed) -> np.ndarray:
    """Flood fill from seed pixels with neighbor set {up, down, right}."""
    h, w = allowed.shape
    region = np.zeros((h, w), dtype=bool)
    queue = deque()
    for x, y in seeds:
        if allowed[y, x] and not region[y, x]:
            region[y, x] = True
            queue.append((x, y))
    while queue:
        x, y = queue.popleft()
        for dx, dy in _FILL_STEPS:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and allowed[ny, nx] and not region[ny, nx]:
                region[ny, nx] = True
                queue.append((nx, ny))
    return region


def sketch_fill(stroke: Stroke, matte, blocked=None) -> np.ndarray:
    """Grow a wisp mask from a guide stroke.

    The rasterized stroke is flood filled inside the matte support with
    neighbors {up, down, right} only; pixels in ``blocked`` (claims of
    previously filled strokes) are never entered. Stroke pixels falling
    outside the matte support are dropped; a stroke entirely outside it
    is an error.
    """
    matte = np.asarray(matte)
    support = matte > 0 if matte.dtype != bool else matte
    stroke_px = rasterize_polyline(stroke.points, support.shape)
    seeds_mask = stroke_px & support
    if not seeds_mask.any():
        raise ExtractionError("stroke lies entirely outside the matte support")
    allowed = support.copy()
    if blocked is not None:
        allowed &= ~np.asarray(blocked, dtype=bool)
    ys, xs = np.nonzero(seeds_mask)
    # seed pixels are always claimable by their own stroke
    allowed[ys, xs] = True
    return _bfs_fill(zip(xs.tolist(), ys.tolist()), allowed)


def fill_strokes(strokes, matte) -> np.ndarray:
    """Run sketch filling for several strokes with first-claim conflicts.

    All stroke pixels are claimed by their stroke up front, then each
    stroke's fill runs in input order and may not enter pixels already
    claimed. Returns an int32 label raster (0 = background, i = stroke i,
    1-based).
    """
    matte = np.asarray(matte)
    support = matte > 0 if matte.dtype != bool else matte
    labels = np.zeros(support.shape, dtype=np.int32)
    seeds = []
    for idx, stroke in enumerate(strokes):
        stroke_px = rasterize_polyline(stroke.points, support.shape) & support
        if not stroke_px.any():
            raise ExtractionError(f"stroke {idx} lies entirely outside the matte support")
        own = stroke_px & (labels == 0)
        labels[own] = idx + 1
        seeds.append(own)
    for idx, own in enumerate(seeds):
        allowed = support & (labels == 0)
        allowed |= own
        ys, xs = np.nonzero(own)
        region = _bfs_fill(zip(xs.tolist(), ys.tolist()), allowed)
        labels[region & (labels == 0)] = idx + 1
    return labels


# Moore neighborhood in clockwise order, starting at west (y grows down).
_MOORE = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))
_MOORE_INDEX = {d: i for i, d in enumerate(_MOORE)}


def trace_boundary(mask) -> list:
    """Ordered clockwise outer-boundary pixel cycle of a mask component.

    Thin parts are visited twice (down one side, back up the other),
    which keeps the cycle a closed walk. The walk starts at the topmost,
    then leftmost pixel.
    """
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise ExtractionError("cannot trace the boundary of an empty mask")
    top = ys.min()
    start = (int(xs[ys == top].min()), int(top))
    h, w = mask.shape

    def on(p):
        x, y = p
        return 0 <= x < w and 0 <= y < h and mask[y, x]

    boundary = [start]
    current = start
    backtrack = (start[0] - 1, start[1])
    first_move = None
    limit = 4 * len(ys) + 8
    for _ in range(limit):
        ci = _MOORE_INDEX[(backtrack[0] - current[0], backtrack[1] - current[1])]
        nxt = None
        prev = backtrack
        for k in range(1, 9):
            d = _MOORE[(ci + k) % 8]
            cand = (current[0] + d[0], current[1] + d[1])
            if on(cand):
                nxt = cand
                break
            prev = cand
        if nxt is None:
            return boundary  # isolated single pixel
        if first_move is None:
            first_move = (current, nxt)
        elif (current, nxt) == first_move:
            break
        boundary.append(nxt)
        backtrack = prev
        current = nxt
    if len(boundary) > 1 and boundary[-1] == boundary[0]:
        boundary.pop()
    return boundary


def split_contour(mask) -> ContourPair:
    """Trace a mask's outer boundary and split it at its vertical extremes.

    The arc whose interior has the smaller mean x becomes the left
    contour. Requires a single 8-connected component.
    """
    mask = np.asarray(mask, dtype=bool)
    _, n_components = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    if n_components == 0:
        raise ExtractionError("mask is empty")
    if n_components > 1:
        raise ExtractionError(
            f"mask has {n_components} components; take the largest component first"
        )
    cycle = trace_boundary(mask)
    ys = [p[1] for p in cycle]
    y_top = min(ys)
    y_bot = max(ys)
    if y_top == y_bot:
        raise ExtractionError("contour degenerate: topmost row equals bottommost row")
    # topmost / bottommost pixel, ties broken by smallest x
    i0 = min(
        (i for i, p in enumerate(cycle) if p[1] == y_top),
        key=lambda i: cycle[i][0],
    )
    ie = min(
        (i for i, p in enumerate(cycle) if p[1] == y_bot),
        key=lambda i: cycle[i][0],
    )
    cycle = cycle[i0:] + cycle[:i0]
    ie = (ie - i0) % len(cycle)

    arc_a = cycle[: ie + 1]
    arc_b = [cycle[0]] + cycle[:ie - 1 if False else None][ie:][::-1] + []
    arc_b = [cycle[0]] + cycle[ie:][::-1][:-1][::-1]  # placeholder, replaced below
    # arc from s_e back around to s_0, reoriented to run s_0 -> s_e
    arc_b = (cycle[ie:] + [cycle[0]])[::-1]

    def interior_mean_x(arc):
        inner = arc[1:-1] if len(arc) > 2 else arc
        return sum(p[0] for p in inner) / len(inner)

    if interior_mean_x(arc_a) <= interior_mean_x(arc_b):
        left, right = arc_a, arc_b
    else:
        left, right = arc_b, arc_a
    return ContourPair(
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        top=cycle[0],
        bottom=cycle[ie],
    )


def subsample_points(points, count) -> np.ndarray:
    """Uniformly subsample an ordered point list to at most ``count``."""
    points = np.asarray(points)
    if len(points) <= count:
        return points
    idx = np.unique(np.round(np.linspace(0, len(points) - 1, count)).astype(int))
    return points[idx]


def smooth_contour(samples, degree: int) -> np.ndarray:
    """Least-squares polynomial fit x = g(y) over contour samples.

    Returns ascending coefficients of length ``degree + 1`` (low-order
    fits are zero padded). With fewer than degree+1 samples the degree
    falls back to n_samples-1.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 2 or len(samples) < 2:
        raise ExtractionError("need at least 2 contour samples to fit")
    xs = samples[:, 0]
    ys = samples[:, 1]
    if np.ptp(ys) == 0:
        raise ExtractionError("contour degenerate: all samples share one y")
    deg = min(degree, len(samples) - 1)
    coeffs = np.polynomial.polynomial.polyfit(ys, xs, deg)
    out = np.zeros(degree + 1, dtype=np.float64)
    out[: len(coeffs)] = coeffs
    return out


def eval_contour(coeffs, ys):
    return np.polynomial.polynomial.polyval(np.asarray(ys, dtype=np.float64), coeffs)


def sharpen_tip(mask, left_coeffs, right_coeffs, tip_fraction, tip_min_width_ratio) -> np.ndarray:
    """Re-rasterize a wisp from its smoothed contours, narrowing the tip.

    Rows in the bottom ``tip_fraction`` of the wisp height have their
    left-right width scaled about the midline; the k-th of n tip rows
    (1-based) gets factor 1 + (tip_min_width_ratio - 1) * k / n, so the
    bottommost row lands exactly on the target ratio.
    """
    mask = np.asarray(mask, dtype=bool)
    ys, _ = np.nonzero(mask)
    if len(ys) == 0:
        raise ExtractionError("cannot sharpen an empty mask")
    y0, y1 = int(ys.min()), int(ys.max())
    h, w = mask.shape
    height = y1 - y0 + 1
    n_tip = int(round(tip_fraction * height))
    out = np.zeros_like(mask)
    for y in range(y0, y1 + 1):
        xl = float(eval_contour(left_coeffs, y))
        xr = float(eval_contour(right_coeffs, y))
        if xr < xl:
            xl, xr = xr, xl
        mid = 0.5 * (xl + xr)
        half = 0.5 * (xr - xl)
        if n_tip > 0 and y > y1 - n_tip:
            k = y - (y1 - n_tip)
            half *= 1.0 + (tip_min_width_ratio - 1.0) * (k / n_tip)
        lo = max(0, math.ceil(mid - half - 1e-9))
        hi = min(w - 1, math.floor(mid + half + 1e-9))
        if hi >= lo:
            out[y, lo:hi + 1] = True
    return out


def largest_component(mask) -> np.ndarray:
    labels, n = ndimage.label(np.asarray(mask, dtype=bool), structure=_EIGHT_CONNECTED)
    if n == 0:
        raise ExtractionError("mask is empty")
    if n == 1:
        return labels == 1
    counts = np.bincount(labels.ravel())[1:]
    return labels == (int(np.argmax(counts)) + 1)


def refine_wisp_mask(
    mask,
    poly_degree: int = 3,
    tip_fraction: float = 0.15,
    tip_min_width_ratio: float = 0.2,
    contour_samples: int = DEFAULT_CONTOUR_SAMPLES,
) -> np.ndarray:
    """Full shape refinement: smooth both contours, then sharpen the tip.

    Wisps wider than twice their height are processed transposed so the
    fit parameter stays the long axis. Falls back to the input mask when
    refinement degenerates to an empty raster.
    """
    mask = largest_component(mask)
    ys, xs = np.nonzero(mask)
    wide = np.ptp(xs) + 1 > 2 * (np.ptp(ys) + 1)
    work = mask.T if wide else mask
    try:
        pair = split_contour(work)
        left = smooth_contour(
            subsample_points(pair.left, contour_samples), poly_degree
        )
        right = smooth_contour(
            subsample_points(pair.right, contour_samples), poly_degree
        )
        refined = sharpen_tip(work, left, right, tip_fraction, tip_min_width_ratio)
    except ExtractionError:
        return mask
    if not refined.any():
        return mask
    return refined.T if wide else refined
