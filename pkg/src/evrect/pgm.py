"""Minimal PGM (P2) image writer for debugging dumps."""

from __future__ import annotations

import numpy as np


def to_pgm(array: np.ndarray) -> str:
    """Grayscale P2 text image, values scaled onto 0..255."""
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("PGM dump needs a 2-D array")
    peak = arr.max()
    scaled = np.zeros_like(arr, dtype=np.int64) if peak <= 0 else np.rint(arr / peak * 255).astype(np.int64)
    lines = ["P2", f"{arr.shape[1]} {arr.shape[0]}", "255"]
    for row in scaled:
        lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"
