"""Writers for field CSVs, support images and JSON reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from balpot.grid import Grid, ScalarField

REPORT_DIGITS = 12


def write_field_csv(path: Path, field: ScalarField) -> None:
    """Header ``# n L h`` (values), then row j = y-index, column i = x-index."""
    g = field.grid
    header = f"{g.n} {g.L:.17g} {g.h:.17g}"
    np.savetxt(path, field.values, fmt="%.17g", delimiter=",", header=header, comments="# ")


def read_field_csv(path: Path) -> ScalarField:
    with open(path) as fh:
        n, L, _ = fh.readline().lstrip("#").split()
    values = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return ScalarField(Grid(int(n), float(L)), values)


def write_support_pgm(path: Path, mask: np.ndarray) -> None:
    """Binary P5 image, 255 inside the support; the top image row is the largest y."""
    img = np.where(mask, 255, 0).astype(np.uint8)[::-1]
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_support_pgm(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("not an 8-bit P5 image")
    w, h = (int(x) for x in dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w)[::-1] == 255


def round_sig(x, digits: int = REPORT_DIGITS):
    """Round floats to ``digits`` significant digits inside nested containers.

    Non-finite floats become None so the file stays strict JSON.
    """
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return None
        return float(f"{x:.{digits}g}")
    if isinstance(x, dict):
        return {k: round_sig(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [round_sig(v, digits) for v in x]
    if isinstance(x, np.generic):
        return round_sig(x.item(), digits)
    return x


def write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(round_sig(payload), indent=2, allow_nan=False) + "\n")


def write_table(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
