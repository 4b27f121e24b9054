"""Scene data model: validated input bundle plus run configuration.

The neural stages of the original pipeline (matting, instance segmentation,
depth, keypoints, face parsing) are replaced by declared input files; this
module loads and validates them into an immutable :class:`StillScene`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from . import rasters
from .errors import ConfigError, DimensionError, ValidationError

MIN_IMAGE_SIDE = 8
MIN_MASK_PIXELS = 16
DEFAULT_MASK_IN_MATTE_FRACTION = 0.95


@dataclass(frozen=True)
class StillScene:
    """A portrait image plus every auxiliary map needed to animate it.

    All rasters share the image's W x H; masks index pixels as [y, x].
    ``depth`` is normalized to [0, 1], smaller = nearer the camera.
    """

    image: np.ndarray              # (H, W, 4) uint8
    hair_matte: np.ndarray         # (H, W) float in [0, 1]
    wisp_masks: tuple              # tuple of (H, W) bool
    forehead_contour: np.ndarray   # (N, 2) float, pixel coords, y down
    depth: np.ndarray              # (H, W) float in [0, 1]
    face_mask: np.ndarray          # (H, W) bool

    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def height(self) -> int:
        return self.image.shape[0]


@dataclass(frozen=True)
class SceneConfig:
    """Simulation and refinement parameters.

    Construction performs no checking so tests can build degenerate
    configurations directly; :func:`validate_config` is the checked path.
    """

    spring_constant: float = 100.0   # force per unit stretched length
    mass: float = 1.0                # per-vertex mass
    gravity: tuple = (0.0, 200.0)    # px/s^2, +y is down
    dt: float = 1.0 / 120.0          # integrator substep, seconds
    frame_count: int = 90
    wind_v0: tuple = (0.0, 0.0)      # initial free-vertex velocity, px/s
    damping: float = 0.05            # velocity damping coefficient, 0 = paper model
    grid_n: int = 6                  # wisp mesh grid cells per axis
    grid_n_aux: int = 12             # auxiliary (whole hair) mesh grid cells
    poly_degree: int = 3             # contour smoothing polynomial degree
    tip_fraction: float = 0.15       # bottom fraction of wisp height treated as tip
    tip_min_width_ratio: float = 0.2
    substeps: int = 4                # integrator substeps per output frame

    def to_map(self) -> dict:
        """Canonical key/value form accepted back by validate_config."""
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def frame_dt(self) -> float:
        return self.dt * self.substeps


# paper-symbol aliases accepted in config files and maps
_ALIASES = {
    "K": "spring_constant",
    "m": "mass",
    "g": "gravity",
    "c": "damping",
    "T": "frame_count",
    "d": "poly_degree",
}

_VECTOR_KEYS = {"gravity", "wind_v0"}
_INT_KEYS = {"frame_count", "grid_n", "grid_n_aux", "poly_degree", "substeps"}


def _parse_vector(key, value) -> tuple:
    if isinstance(value, (tuple, list, np.ndarray)):
        vals = [float(v) for v in value]
    else:
        vals = [float(v) for v in str(value).replace(",", " ").split()]
    if len(vals) != 2:
        raise ConfigError(f"{key} must be a 2D vector, got {value!r}")
    return (vals[0], vals[1])


def _parse_scalar(key, value):
    try:
        if key in _INT_KEYS:
            as_float = float(value)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be numeric, got {value!r}") from None


def validate_config(raw: dict | None = None) -> SceneConfig:
    """Apply defaults, coerce types, and enforce every config constraint.

    Raises ConfigError naming the violated constraint. Unknown keys are an
    error so typos cannot silently fall back to defaults.
    """
    raw = dict(raw or {})
    values = {}
    for key, value in raw.items():
        canonical = _ALIASES.get(key, key)
        if canonical not in SceneConfig.__dataclass_fields__:
            raise ConfigError(f"unknown config key: {key!r}")
        if canonical in values:
            raise ConfigError(f"config key given twice (alias clash): {key!r}")
        if canonical in _VECTOR_KEYS:
            values[canonical] = _parse_vector(canonical, value)
        else:
            values[canonical] = _parse_scalar(canonical, value)

    cfg = SceneConfig(**values)

    if cfg.spring_constant <= 0:
        raise ConfigError(f"spring_constant must be > 0, got {cfg.spring_constant}")
    if cfg.mass <= 0:
        raise ConfigError(f"mass must be > 0, got {cfg.mass}")
    if cfg.dt <= 0:
        raise ConfigError(f"dt must be > 0, got {cfg.dt}")
    bound = 2.0 * math.sqrt(cfg.mass / cfg.spring_constant)
    if cfg.dt >= bound:
        raise ConfigError(
            f"dt must satisfy dt < 2*sqrt(mass/spring_constant) "
            f"for integrator stability ({cfg.dt} >= {bound})"
        )
    if cfg.frame_count < 1:
        raise ConfigError(f"frame_count must be >= 1, got {cfg.frame_count}")
    if cfg.damping < 0:
        raise ConfigError(f"damping must be >= 0, got {cfg.damping}")
    if cfg.grid_n < 2:
        raise ConfigError(f"grid_n must be >= 2, got {cfg.grid_n}")
    if cfg.grid_n_aux < 2:
        raise ConfigError(f"grid_n_aux must be >= 2, got {cfg.grid_n_aux}")
    if cfg.poly_degree < 1:
        raise ConfigError(f"poly_degree must be >= 1, got {cfg.poly_degree}")
    if not 0.0 < cfg.tip_fraction < 0.5:
        raise ConfigError(f"tip_fraction must lie in (0, 0.5), got {cfg.tip_fraction}")
    if not 0.0 < cfg.tip_min_width_ratio <= 1.0:
        raise ConfigError(
            f"tip_min_width_ratio must lie in (0, 1], got {cfg.tip_min_width_ratio}"
        )
    if cfg.substeps < 1:
        raise ConfigError(f"substeps must be >= 1, got {cfg.substeps}")
    return cfg


def read_config_file(path) -> dict:
    """Parse a flat "key = value" config file into a raw mapping."""
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key in raw:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value.strip()
    return raw


def _check_same_shape(name, arr, width, height):
    if arr.shape[:2] != (height, width):
        raise DimensionError(
            f"{name}: expected {width}x{height}, got "
            f"{arr.shape[1]}x{arr.shape[0]}"
        )


def build_scene(
    image,
    hair_matte,
    wisp_masks,
    forehead_contour,
    depth,
    face_mask,
    mask_in_matte_fraction: float = DEFAULT_MASK_IN_MATTE_FRACTION,
    names: dict | None = None,
) -> StillScene:
    """Assemble and validate a StillScene from in-memory arrays.

    ``names`` maps component keys (matte, depth, ...) to file paths so
    errors can name the offending file when loading from disk.
    """
    names = names or {}

    def label(key):
        return str(names.get(key, key))

    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 3 or image.shape[2] != 4:
        raise ValidationError(f"{label('image')}: image must be RGBA (H, W, 4)")
    height, width = image.shape[:2]
    if width < MIN_IMAGE_SIDE or height < MIN_IMAGE_SIDE:
        raise ValidationError(
            f"{label('image')}: image must be at least "
            f"{MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}, got {width}x{height}"
        )

    hair_matte = np.asarray(hair_matte, dtype=np.float64)
    _check_same_shape(label("matte"), hair_matte, width, height)
    if hair_matte.min() < 0 or hair_matte.max() > 1:
        raise ValidationError(f"{label('matte')}: matte values must lie in [0, 1]")

    depth = np.asarray(depth, dtype=np.float64)
    _check_same_shape(label("depth"), depth, width, height)
    if depth.min() < 0 or depth.max() > 1:
        raise ValidationError(f"{label('depth')}: depth values must lie in [0, 1]")

    face_mask = np.asarray(face_mask, dtype=bool)
    _check_same_shape(label("face"), face_mask, width, height)

    matte_support = hair_matte > 0
    checked_masks = []
    for i, mask in enumerate(wisp_masks):
        mask = np.asarray(mask, dtype=bool)
        _check_same_shape(f"{label('masks')} (wisp {i + 1})", mask, width, height)
        count = int(mask.sum())
        if count < MIN_MASK_PIXELS:
            raise ValidationError(
                f"{label('masks')}: wisp mask {i + 1} has {count} pixels "
                f"(minimum {MIN_MASK_PIXELS})"
            )
        inside = int((mask & matte_support).sum())
        if inside < mask_in_matte_fraction * count:
            raise ValidationError(
                f"{label('masks')}: wisp mask {i + 1} lies only "
                f"{inside / count:.1%} inside the matte support "
                f"(minimum {mask_in_matte_fraction:.0%})"
            )
        checked_masks.append(mask)

    contour = np.asarray(forehead_contour, dtype=np.float64)
    if contour.ndim != 2 or contour.shape[1] != 2 or contour.shape[0] < 2:
        raise ValidationError(
            f"{label('contour')}: forehead contour needs >= 2 (x, y) points"
        )
    if (
        contour[:, 0].min() < 0
        or contour[:, 0].max() > width - 1
        or contour[:, 1].min() < 0
        or contour[:, 1].max() > height - 1
    ):
        raise ValidationError(
            f"{label('contour')}: forehead contour points must lie inside the image"
        )

    scene = StillScene(
        image=image,
        hair_matte=hair_matte,
        wisp_masks=tuple(checked_masks),
        forehead_contour=contour,
        depth=depth,
        face_mask=face_mask,
    )
    for arr in (scene.image, scene.hair_matte, scene.depth, scene.face_mask,
                scene.forehead_contour, *scene.wisp_masks):
        arr.setflags(write=False)
    return scene


def load_scene(
    image_path,
    matte_path,
    masks_path,
    contour_path,
    depth_path,
    face_path,
    mask_in_matte_fraction: float = DEFAULT_MASK_IN_MATTE_FRACTION,
) -> StillScene:
    """Load every scene component from disk and validate the bundle."""
    names = {
        "image": image_path,
        "matte": matte_path,
        "masks": masks_path,
        "contour": contour_path,
        "depth": depth_path,
        "face": face_path,
    }
    return build_scene(
        image=rasters.load_rgba(image_path),
        hair_matte=rasters.load_gray01(matte_path),
        wisp_masks=rasters.load_masks(masks_path),
        forehead_contour=rasters.load_polyline(contour_path),
        depth=rasters.load_gray01(depth_path),
        face_mask=rasters.load_binary(face_path),
        mask_in_matte_fraction=mask_in_matte_fraction,
        names=names,
    )
