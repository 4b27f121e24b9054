"""Hot-loop kernels with a compiled core and a pure-numpy fallback.

The compiled extension (``wispwind._kernels._native``, built from
``_native.pyx``) is preferred when present; otherwise the numpy reference
implementation is used. ``WISPWIND_KERNELS=reference`` or ``=native``
forces a backend (the latter raises if the extension is missing).

Both backends implement the same contracts and agree to ~1e-12; see
``benchmarks/bench_kernels.py`` for timing and agreement checks.
"""

from __future__ import annotations

import os

from . import reference

_FORCED = os.environ.get("WISPWIND_KERNELS", "").strip().lower()

native = None
if _FORCED != "reference":
    try:
        from . import _native as native  # type: ignore[no-redef]
    except ImportError:
        native = None
        if _FORCED == "native":
            raise ImportError(
                "WISPWIND_KERNELS=native but the compiled extension is not "
                "built; reinstall with a C compiler available"
            ) from None

_active = native if native is not None else reference

BACKEND = "native" if native is not None else "reference"

tps_displacement_grid = _active.tps_displacement_grid
bilinear_sample = _active.bilinear_sample
spring_forces = _active.spring_forces
diffusion_fill = _active.diffusion_fill


def backends() -> dict:
    """Mapping of available backend name -> module (for benchmarks/tests)."""
    out = {"reference": reference}
    if native is not None:
        out["native"] = native
    return out
