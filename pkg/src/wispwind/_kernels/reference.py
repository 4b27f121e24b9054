"""Pure-numpy kernel implementations (fallback backend).

These are the reference semantics for the compiled kernels in
``_native.pyx``; keep the two in lockstep (same per-element operation
order so the backends agree to rounding).
"""

from __future__ import annotations

import numpy as np

_TINY = np.finfo(np.float64).tiny


def tps_displacement_grid(ctrl, wrad, affine, x0, y0, width, height):
    """Evaluate a fitted TPS displacement field on a pixel grid.

    ctrl: (n, 2) control points; wrad: (n, 2) radial weights;
    affine: (3, 2) rows [const, x, y]. Returns (height, width, 2) float64
    displacements (mapped position minus pixel position) for pixel centers
    (x0 + i, y0 + j).
    """
    ctrl = np.ascontiguousarray(ctrl, dtype=np.float64)
    wrad = np.ascontiguousarray(wrad, dtype=np.float64)
    affine = np.ascontiguousarray(affine, dtype=np.float64)
    n = max(1, len(ctrl))
    chunk = max(1, 2_000_000 // max(1, width * n))
    xs = x0 + np.arange(width, dtype=np.float64)
    out = np.empty((height, width, 2), dtype=np.float64)
    for j0 in range(0, height, chunk):
        j1 = min(j0 + chunk, height)
        ys = y0 + np.arange(j0, j1, dtype=np.float64)
        px = np.broadcast_to(xs[None, :], (j1 - j0, width))
        py = np.broadcast_to(ys[:, None], (j1 - j0, width))
        dx = px[..., None] - ctrl[:, 0]
        dy = py[..., None] - ctrl[:, 1]
        r2 = dx * dx + dy * dy
        u = np.where(r2 > 0.0, r2 * np.log(np.maximum(r2, _TINY)), 0.0)
        mapped = u @ wrad
        mapped += affine[0]
        mapped += px[..., None] * affine[1]
        mapped += py[..., None] * affine[2]
        out[j0:j1, :, 0] = mapped[..., 0] - px
        out[j0:j1, :, 1] = mapped[..., 1] - py
    return out


def bilinear_sample(src, xs, ys):
    """Sample (H, W, C) float64 ``src`` at float coords, zero outside.

    xs/ys are same-shaped arrays of sample positions in src pixel
    coordinates (integer coordinates hit pixel centers exactly).
    """
    src = np.ascontiguousarray(src, dtype=np.float64)
    h, w = src.shape[:2]
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        x0 = np.floor(xs)
        y0 = np.floor(ys)
        fx = xs - x0
        fy = ys - y0
        x0i = np.nan_to_num(x0, nan=-(2 ** 30)).astype(np.int64)
        y0i = np.nan_to_num(y0, nan=-(2 ** 30)).astype(np.int64)

    out = np.zeros(xs.shape + (src.shape[2],), dtype=np.float64)
    # corner order (y0,x0), (y0,x1), (y1,x0), (y1,x1) mirrors the native loop
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0i + dx
            yi = y0i + dy
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            if not valid.any():
                continue
            vals = src[yi[valid], xi[valid], :]
            out[valid] += weight[valid][:, None] * vals
    return out


def spring_forces(positions, edges, rest_lengths, spring_constant):
    """Accumulate Hooke spring forces per vertex.

    positions: (n, 2); edges: (m, 2) int; rest_lengths: (m,). Edges with
    coincident endpoints (< 1e-9 apart) contribute nothing.
    """
    positions = np.asarray(positions, dtype=np.float64)
    forces = np.zeros_like(positions)
    if len(edges) == 0:
        return forces
    edges = np.asarray(edges)
    rest_lengths = np.asarray(rest_lengths, dtype=np.float64)
    i = edges[:, 0]
    j = edges[:, 1]
    d = positions[j] - positions[i]
    length = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])
    ok = length >= 1e-9
    scale = np.zeros_like(length)
    scale[ok] = spring_constant * (length[ok] - rest_lengths[ok]) / length[ok]
    f = scale[:, None] * d
    np.add.at(forces, i, f)
    np.subtract.at(forces, j, f)
    return forces


def diffusion_fill(values, known, tol, max_iter):
    """Fill unknown pixels by iterated 4-neighbor means (Jacobi sweeps).

    values: (H, W, C) float64 with meaningful data where ``known``. Each
    sweep assigns every unknown pixel the mean of its in-bounds neighbors
    that already carry a value (neighbor order up, down, left, right, as
    in the native kernel). Stops once every hole pixel has a value and the
    largest per-pixel change of a sweep drops below ``tol``, or after
    ``max_iter`` sweeps. Returns (filled values, sweeps run).
    """
    values = np.array(values, dtype=np.float64)
    known = np.asarray(known, dtype=bool)
    has_value = known.copy()
    hole = ~known
    values[hole] = 0.0
    if not hole.any():
        return values, 0
    n_hole = int(hole.sum())

    for iteration in range(1, max_iter + 1):
        masked = values * has_value[:, :, None]
        acc = np.zeros_like(values)
        cnt = np.zeros(values.shape[:2], dtype=np.float64)
        acc[1:] += masked[:-1]
        cnt[1:] += has_value[:-1]
        acc[:-1] += masked[1:]
        cnt[:-1] += has_value[1:]
        acc[:, 1:] += masked[:, :-1]
        cnt[:, 1:] += has_value[:, :-1]
        acc[:, :-1] += masked[:, 1:]
        cnt[:, :-1] += has_value[:, 1:]

        update = hole & (cnt > 0)
        n_update = int(update.sum())
        if n_update == 0:
            return values, iteration
        new_vals = acc[update] / cnt[update][:, None]
        first_fill = not has_value[update].all()
        if first_fill:
            max_change = np.inf
        else:
            max_change = float(np.abs(new_vals - values[update]).max())
        values[update] = new_vals
        has_value |= update
        if n_update == n_hole and not first_fill and max_change < tol:
            return values, iteration
    return values, max_iter
