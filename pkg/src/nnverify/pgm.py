"""Plain-ASCII PGM (P2) reading and writing for witness and dataset images."""

from __future__ import annotations

import numpy as np


def write_pgm(path, pixels: np.ndarray, maxval: int = 255) -> None:
    """Write a 2-D array of normalized [0,1] intensities as P2 text."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2:
        raise ValueError("PGM output needs a 2-D pixel array")
    scaled = np.rint(np.clip(pixels, 0.0, 1.0) * maxval).astype(int)
    h, w = scaled.shape
    lines = ["P2", f"{w} {h}", str(maxval)]
    lines += [" ".join(str(v) for v in row) for row in scaled]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pgm(path) -> np.ndarray:
    """Read a P2 file back into normalized [0,1] intensities."""
    with open(path, "r", encoding="ascii") as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0]
            tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path}: not an ASCII PGM (P2) file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = [int(t) for t in tokens[4 : 4 + w * h]]
    if len(data) != w * h:
        raise ValueError(f"{path}: expected {w * h} pixels, found {len(data)}")
    return np.array(data, dtype=np.float64).reshape(h, w) / maxval
