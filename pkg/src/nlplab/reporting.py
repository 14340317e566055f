"""Record emission: per-record JSON, an aggregate flat CSV, optional SVG plots.

Determinism contract: identical records produce byte-identical files — fixed
column order (first appearance), repr-based float formatting, no wall-clock
fields, and a fixed matplotlib hash salt for SVG ids.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

__all__ = ["emit_report", "write_solution_csv", "record_name"]

_SAFE = re.compile(r"[^a-zA-Z0-9._-]+")


def _jsonable(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def record_name(record: dict, fallback: str) -> str:
    name = str(record.get("name", fallback))
    return _SAFE.sub("-", name) or fallback


def _flatten(record: dict, prefix: str = "") -> dict:
    flat = {}
    for key, val in record.items():
        if key == "plot":
            continue
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            flat.update(_flatten(val, prefix=f"{name}."))
        else:
            flat[name] = val
    return flat


def _cell(val) -> str:
    if isinstance(val, (np.floating,)):
        val = float(val)
    if isinstance(val, (np.integer,)):
        val = int(val)
    if isinstance(val, bool) or isinstance(val, np.bool_):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, (int, str)):
        return str(val)
    if val is None:
        return ""
    return json.dumps(val, sort_keys=True, default=_jsonable)


def _write_svg(record: dict, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg", force=False)
    matplotlib.rcParams["svg.hashsalt"] = "nlplab"
    import matplotlib.pyplot as plt

    plot = record["plot"]
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    x = np.asarray(plot["x"], float)
    y = np.asarray(plot["y"], float)
    if plot.get("kind") == "loglog":
        ax.loglog(x, y, marker="o", linestyle="none")
        fit = plot.get("fit")
        if fit:
            xs = np.geomspace(x.min(), x.max(), 64)
            ax.loglog(xs, np.exp(fit["intercept"]) * xs ** fit["slope"], "--")
    else:
        ax.plot(x, y, marker="o")
    ax.set_xlabel(plot.get("xlabel", "x"))
    ax.set_ylabel(plot.get("ylabel", "y"))
    ax.set_title(plot.get("title", record.get("name", "")))
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(
    records: list[dict],
    out_dir,
    formats=("json", "csv"),
    basename: str = "nlplab",
) -> list[Path]:
    """Write records to out_dir; returns the created paths.

    json: one <name>.json per record (name collisions get -2, -3, ...);
    csv:  one aggregate <basename>.csv, header-only when records is empty;
    svg:  one plot per record carrying a "plot" block.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    used: dict[str, int] = {}

    names = []
    for i, record in enumerate(records):
        base = record_name(record, f"{basename}-{i}")
        count = used.get(base, 0) + 1
        used[base] = count
        names.append(base if count == 1 else f"{base}-{count}")

    if "json" in formats:
        for record, name in zip(records, names):
            path = out_dir / f"{name}.json"
            body = {k: v for k, v in record.items() if k != "plot"}
            path.write_text(
                json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n"
            )
            created.append(path)

    if "csv" in formats:
        columns: list[str] = []
        flats = []
        for record in records:
            flat = _flatten(record)
            flats.append(flat)
            for key in flat:
                if key not in columns:
                    columns.append(key)
        path = out_dir / f"{basename}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for flat in flats:
                writer.writerow([_cell(flat.get(col)) for col in columns])
        created.append(path)

    if "svg" in formats:
        for record, name in zip(records, names):
            if "plot" in record:
                path = out_dir / f"{name}.svg"
                _write_svg(record, path)
                created.append(path)

    return created


def write_solution_csv(path, domain, values) -> Path:
    """Node table: coordinates, value, interior flag."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    axis_names = ["x", "y"][: domain.n]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(axis_names + ["value", "interior"])
        for i in range(domain.node_count):
            row = [repr(float(c)) for c in domain.coords[i]]
            row.append(repr(float(values[i])))
            row.append("true" if bool(domain.interior_mask[i]) else "false")
            writer.writerow(row)
    return path
