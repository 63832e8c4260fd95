"""Text dumps of Mandel-vector grid fields (`plate-field v1`).

Header line: ``plate-field v1 d <d> N <N> m <m>``, followed by N^d lines of m
reals, voxels row-major (axis 0 slowest), 17 significant digits.
"""
from __future__ import annotations

import numpy as np

from .mandel import mandel_size

FIELD_MAGIC = "plate-field"
FIELD_VERSION = "v1"


class FieldFormatError(ValueError):
    """Raised for malformed field-dump files."""


def write_field(path, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=float)
    m = values.shape[-1]
    d = values.ndim - 1
    n = values.shape[0]
    if values.shape != (n,) * d + (m,):
        raise ValueError(f"expected shape (N,)*d + (m,), got {values.shape}")
    if mandel_size(d) != m:
        raise ValueError(f"component count {m} does not match dimension {d}")
    rows = values.reshape(-1, m)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{FIELD_MAGIC} {FIELD_VERSION} d {d} N {n} m {m}\n")
        for row in rows:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_field(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.split() for line in fh]
    lines = [t for t in lines if t]
    if not lines:
        raise FieldFormatError("empty field file")
    header = lines[0]
    if (
        len(header) != 8
        or header[0] != FIELD_MAGIC
        or header[1] != FIELD_VERSION
        or header[2] != "d"
        or header[4] != "N"
        or header[6] != "m"
    ):
        raise FieldFormatError(
            f"malformed header (expected '{FIELD_MAGIC} {FIELD_VERSION} d _ N _ m _')"
        )
    try:
        d, n, m = int(header[3]), int(header[5]), int(header[7])
    except ValueError as exc:
        raise FieldFormatError(f"non-integer header entry: {exc}") from None
    if mandel_size(d) != m:
        raise FieldFormatError(f"component count {m} does not match dimension {d}")
    body = lines[1:]
    if len(body) != n**d:
        raise FieldFormatError(f"expected N^d = {n**d} rows, found {len(body)}")
    try:
        values = np.array([[float(v) for v in row] for row in body])
    except ValueError as exc:
        raise FieldFormatError(f"bad field entry: {exc}") from None
    if values.shape != (n**d, m):
        raise FieldFormatError(f"rows must carry {m} reals each")
    return values.reshape((n,) * d + (m,))
