"""Machine-readable outputs: CSV, whitespace tables and JSON, written atomically.

Every file starts with comment lines carrying the config hash and the units
of each column. The generation timestamp sits on its own ``# generated`` line
so two runs of the same config differ only there.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write(path, data) -> Path:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _header(title: str, config_hash: str, columns, units: dict) -> list[str]:
    unit_text = "; ".join(f"{c}={units.get(c, '1')}" for c in columns)
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return [f"# {title}", f"# config_hash: {config_hash}", f"# units: {unit_text}", f"# generated: {stamp}"]


def csv_text(title: str, config_hash: str, columns, rows, units: dict | None = None) -> str:
    lines = _header(title, config_hash, columns, units or {})
    lines.append(",".join(columns))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def table_text(title: str, config_hash: str, columns, rows, units: dict | None = None) -> str:
    """Whitespace-separated table that gnuplot reads directly."""
    lines = _header(title, config_hash, columns, units or {})
    lines.append("# " + " ".join(columns))
    lines += [" ".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(path, title, config_hash, columns, rows, units=None) -> Path:
    return atomic_write(path, csv_text(title, config_hash, columns, rows, units))


def write_table(path, title, config_hash, columns, rows, units=None) -> Path:
    return atomic_write(path, table_text(title, config_hash, columns, rows, units))


def plain(obj):
    """Convert numpy values and tuples into JSON-ready builtins."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [plain(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, doc: dict, config_hash: str, units: dict | None = None) -> Path:
    out = {"config_hash": config_hash, "units": units or {},
           "generated": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    out.update(plain(doc))
    return atomic_write(path, json.dumps(out, indent=1, sort_keys=True) + "\n")


def body(text: str) -> str:
    """File content without the timestamp line, for reproducibility checks."""
    return "".join(l for l in text.splitlines(keepends=True) if not l.startswith("# generated"))
