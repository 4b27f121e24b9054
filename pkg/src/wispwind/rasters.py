"""Lossless raster and polyline file I/O.

Conventions used across the package: pixel coordinates have the origin at
the top-left corner, x grows right, y grows down, and integer coordinates
address pixel centers. Depth rasters are normalized to [0, 1] with smaller
values nearer the camera.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ParseError


def load_rgba(path) -> np.ndarray:
    """Load any Pillow-readable raster as an (H, W, 4) uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGBA"), dtype=np.uint8)


def load_gray01(path) -> np.ndarray:
    """Load a grayscale raster as floats in [0, 1] (16-bit aware)."""
    with Image.open(path) as im:
        if im.mode in ("I", "I;16", "I;16B", "I;16L"):
            arr = np.asarray(im, dtype=np.float64)
            return arr / 65535.0
        arr = np.asarray(im.convert("L"), dtype=np.float64)
        return arr / 255.0


def load_binary(path) -> np.ndarray:
    """Load a raster as a boolean mask (nonzero / >50% gray = True)."""
    return load_gray01(path) > 0.5


def load_label_raster(path) -> np.ndarray:
    """Load an indexed label raster (0 = background, i = region i)."""
    with Image.open(path) as im:
        if im.mode == "P":
            im = im.convert("L")
        if im.mode in ("I", "I;16", "I;16B", "I;16L"):
            return np.asarray(im, dtype=np.int32)
        return np.asarray(im.convert("L"), dtype=np.int32)


def load_masks(path) -> list[np.ndarray]:
    """Load wisp masks from an indexed label raster or a directory.

    A directory is read as one binary raster per file, sorted by filename;
    a single file is read as a label raster whose positive values are the
    1-based wisp ids.
    """
    p = Path(path)
    if p.is_dir():
        files = sorted(f for f in p.iterdir() if f.is_file())
        if not files:
            raise ParseError(f"mask directory is empty: {path}")
        return [load_binary(f) for f in files]
    labels = load_label_raster(p)
    n = int(labels.max())
    return [labels == i for i in range(1, n + 1)]


def save_rgba(arr: np.ndarray, path) -> None:
    arr = np.asarray(arr, dtype=np.uint8)
    Image.fromarray(arr, "RGBA").save(path, "PNG")


def save_gray(arr: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(arr, dtype=np.uint8), "L").save(path, "PNG")


def save_label_raster(labels: np.ndarray, path) -> None:
    labels = np.asarray(labels)
    if labels.max() > 255:
        Image.fromarray(labels.astype(np.int32), "I").save(path, "PNG")
    else:
        save_gray(labels.astype(np.uint8), path)


def load_polyline(path) -> np.ndarray:
    """Read an "x y" per line polyline file into an (N, 2) float array.

    Blank lines and lines starting with '#' are ignored.
    """
    points = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read polyline file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'x y', got {raw!r}")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric coordinate in {raw!r}") from exc
    if len(points) < 2:
        raise ParseError(f"{path}: polyline needs at least 2 points, got {len(points)}")
    return np.asarray(points, dtype=np.float64)


def save_polyline(points: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        for x, y in np.asarray(points, dtype=np.float64):
            fh.write(f"{x:.6f} {y:.6f}{os.linesep}")
