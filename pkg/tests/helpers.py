"""Shared test helpers for reading CLI output and sizing numeric tolerances."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

_EPS = float(np.finfo(np.float64).eps)


def split_csv(text: str) -> tuple[str, list[dict[str, str]]]:
    """Return (provenance header line, data rows keyed by column)."""
    header, _, body = text.partition("\n")
    return header, list(csv.DictReader(io.StringIO(body)))


def read_csv(path: Path) -> tuple[str, list[dict[str, str]]]:
    return split_csv(path.read_text())


def column(rows: list[dict[str, str]], name: str) -> list[float]:
    return [float(r[name]) for r in rows]


def excess_tolerance(s: float) -> float:
    """Bound on n_excess of a rounded pure state with squeezed variance ``s``.

    Entries of order 1/s carry rounding of order eps/s, and n_excess divides
    their quadratic combination by the Duan product s, so the floor grows as eps/s³.
    """
    return 1e-9 + 4 * _EPS / s**3
