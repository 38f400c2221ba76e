"""CSV rendering with a provenance header, written atomically."""

from __future__ import annotations

import csv
import io
import logging
import math
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from cvent import __version__

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

logger = logging.getLogger(__name__)

NA = "NA"
STDOUT = "-"


def format_value(value: float | int | str | None) -> str:
    """12 significant digits; None and NaN become ``NA``."""
    if value is None:
        return NA
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return NA
    return format(value, ".12g")


def provenance_header(config_hash: str, generator: str) -> str:
    return f"# cvent={__version__} config={config_hash} generator={generator}"


def render_csv(header: str, columns: Sequence[str], rows: Iterable[Sequence[float | int | str | None]]) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} values for {len(columns)} columns")
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_text_atomic(path: Path, data: str) -> None:
    """Write through a sibling temp file and rename it over the target."""
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        tmp.write_text(data)
        tmp.rename(path)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise


def write_csv(
    out: str | Path,
    header: str,
    columns: Sequence[str],
    rows: Iterable[Sequence[float | int | str | None]],
) -> int:
    """Render and write a CSV to ``out`` (``-`` for stdout). Returns the number of data rows."""
    rows = list(rows)
    data = render_csv(header, columns, rows)
    if str(out) == STDOUT:
        sys.stdout.write(data)
    else:
        write_text_atomic(Path(out), data)
    logger.info("output.written path=%s rows=%d", out, len(rows))
    return len(rows)
