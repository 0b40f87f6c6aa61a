"""Module writing CSV tables and JSON reports for the command-line front end."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from qlangevin.logs import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = ".17g"
GENERATOR_NAME = "numpy.random.PCG64"


def format_value(value) -> str:
    """Renders a table cell; floats keep 17 significant digits."""
    if isinstance(value, bool | np.bool_):
        return str(int(value))
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return format(float(value), FLOAT_FORMAT)
    return str(value)


def to_jsonable(value):
    """
    Converts numpy scalars and arrays, tuples and nested containers to plain
    JSON values. NaN and infinities become null.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, bool | np.bool_):
        return bool(value)
    if isinstance(value, int | np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex | np.complexfloating):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, Path):
        return str(value)
    return value


def meta_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".meta.json")


def run_metadata(command: str, params: dict, seed: int) -> dict:
    return {
        "command": command,
        "params": to_jsonable(params),
        "seed": seed,
        "generator": GENERATOR_NAME,
    }


def write_json(path: str | Path, payload: dict) -> None:
    path = Path(path)
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info(f"Report written to {path}")


def write_csv(
    path: str | Path,
    header: list[str],
    rows: list,
    footer: dict | None = None,
    meta: dict | None = None,
) -> None:
    """
    Writes an RFC-4180 table with a header row, then one row per footer scalar
    (name in the first column, value in the second).

    :param path: Output CSV path.
    :param header: Column names.
    :param rows: Sequences of cell values, one per row.
    :param footer: Scalars appended after the data rows.
    :param meta: When given, written with the footer to the sibling .meta.json.
    """
    path = Path(path)
    footer = footer or {}
    width = len(header)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        for name, value in footer.items():
            writer.writerow([name, format_value(value)] + [""] * max(0, width - 2))
    logger.info(f"Table with {len(rows)} rows written to {path}")

    if meta is not None:
        write_json(meta_path(path), {**meta, "footer": footer})
