"""Flat-shaded rasterization of element fields and binary PGM output."""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .mesh import Mesh


def element_at_pixels(mesh: Mesh, scale: int = 4) -> np.ndarray:
    """Element index under each pixel center of a (scale*n) x (scale*n) image, row 0 at y = 1."""
    n = mesh.n
    size = scale * n
    centers = (np.arange(size) + 0.5) / size
    x = centers[None, :] * n
    y = (1.0 - centers)[:, None] * n
    i = np.minimum(np.floor(x).astype(np.int64), n - 1)
    j = np.minimum(np.floor(y).astype(np.int64), n - 1)
    upper = (y - j) > (x - i)  # above the lower-left to upper-right diagonal
    return 2 * (j * n + i) + upper


def rasterize(mesh: Mesh, values, scale: int = 4) -> np.ndarray:
    values = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    if values.shape != (mesh.n_elements,):
        raise ValueError(f"expected {mesh.n_elements} element values, got shape {values.shape}")
    return np.rint(255.0 * values[element_at_pixels(mesh, scale)]).astype(np.uint8)


def write_pgm(path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    rows, cols = image.shape
    with open(Path(path), "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError("not a binary PGM file")
    cols, rows, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    return np.frombuffer(data[m.end(): m.end() + rows * cols], dtype=np.uint8).reshape(rows, cols)
