"""Hot numeric kernels: compiled core when built, numpy fallback otherwise.

Set IDSEL_PURE_KERNELS=1 to force the numpy backend even when the compiled
extension is importable (used by the benchmark and backend-equivalence tests).
"""

from __future__ import annotations

import os

import numpy as np

from idsel.kernels import pure as _pure

if os.environ.get("IDSEL_PURE_KERNELS") == "1":
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from idsel.kernels import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"


def backend() -> str:
    """Name of the active backend: "compiled" or "pure"."""
    return BACKEND


def pairwise_cosine(unit: np.ndarray, threads: int = 1) -> np.ndarray:
    return _impl.pairwise_cosine(unit, threads=threads)


def prim_mst(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    return _impl.prim_mst(dist, core)


def rss_scan(sim: np.ndarray) -> list[int]:
    return [int(p) for p in _impl.rss_scan(sim)]
