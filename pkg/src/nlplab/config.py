"""Experiment-config loading: schema validation and object construction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .expressions import ExpressionError, compile_expression
from .grid import Ball, Box
from .kernels import (
    KernelSpec,
    LogBorderline,
    LogPerturbedPower,
    Min,
    Power,
    PureLog,
    Sum,
    Tabulated,
)
from .tail import FarFieldModel

__all__ = ["LoadedConfig", "load_config", "load_schema", "build_kernel_spec"]

_VARIANT_FIELDS = {
    "power": (Power, ("s",)),
    "sum": (Sum, ("s", "s_upper")),
    "min": (Min, ("s", "s_upper")),
    "log_perturbed": (LogPerturbedPower, ("s", "gamma")),
    "log_borderline": (LogBorderline, ("gamma", "s")),
    "pure_log": (PureLog, ("gamma",)),
    "tabulated": (Tabulated, ("t", "values")),
}


@dataclass
class LoadedConfig:
    raw: dict
    path: Path
    kernel: KernelSpec
    shape: object
    h: float
    R_trunc: float
    node_limit: int | None
    g: object  # callable, scalar, or node array
    far_field: FarFieldModel | None
    tasks: list = field(default_factory=list)
    out_dir: Path = Path("out")
    formats: tuple = ("json", "csv")
    basename: str = "nlplab"


def load_schema() -> dict:
    text = resources.files("nlplab").joinpath("config_schema.json").read_text()
    return json.loads(text)


def _anchor_line(text: str, path_elems) -> int | None:
    """Best-effort: walk the config text following the string keys of the
    error path and report the line of the last one found."""
    pos = 0
    line = None
    for elem in path_elems:
        if not isinstance(elem, str):
            continue
        hit = text.find(f'"{elem}"', pos)
        if hit < 0:
            break
        pos = hit
        line = text.count("\n", 0, hit) + 1
    return line


def build_kernel_spec(block: dict) -> KernelSpec:
    kind = block["variant"]
    cls, fields = _VARIANT_FIELDS[kind]
    kwargs = {}
    for name in fields:
        if name not in block:
            raise ConfigError(f"kernel variant {kind!r} needs field {name!r}")
        val = block[name]
        if name in ("t", "values"):
            val = tuple(float(v) for v in val)
        kwargs[name] = val
    # 's' doubles as a variant parameter and the declared decay index
    variant = cls(**kwargs)
    return KernelSpec(
        variant=variant,
        p=float(block["p"]),
        s=block.get("s"),
        s_tilde=block.get("s_tilde"),
        L=block.get("L"),
        Lambda=float(block.get("Lambda", 1.0)),
    )


def _build_shape(block: dict):
    if block["kind"] == "ball":
        return Ball(center=tuple(block["center"]), radius=float(block["radius"]))
    return Box(lo=tuple(block["lo"]), hi=tuple(block["hi"]))


def _build_g(data_block: dict, dim: int):
    g = data_block.get("g", 0.0)
    if isinstance(g, str):
        try:
            return compile_expression(g, dim=dim)
        except ExpressionError as exc:
            raise ConfigError(f"data.g: {exc}") from exc
    if isinstance(g, list):
        return np.asarray(g, float)
    return float(g)


def _build_far_field(data_block: dict) -> FarFieldModel | None:
    block = data_block.get("far_field")
    if block is None:
        return None
    try:
        return FarFieldModel(
            kind=block["kind"],
            amplitude=float(block.get("amplitude", 0.0)),
            exponent=float(block.get("exponent", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"data.far_field: {exc}") from exc


def load_config(path) -> LoadedConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}: config is not valid JSON: {exc.msg}",
            line=exc.lineno,
        ) from exc

    schema = load_schema()
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = ".".join(str(x) for x in err.absolute_path) or "<root>"
        line = _anchor_line(text, err.absolute_path)
        anchor = f"{path}:{line}" if line else str(path)
        raise ConfigError(f"{anchor}: at {where}: {err.message}", line=line)

    try:
        kernel = build_kernel_spec(raw["kernel"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: kernel: {exc}") from exc
    shape = _build_shape(raw["domain"]["shape"])
    data_block = raw.get("data", {})
    out_block = raw.get("output", {})
    return LoadedConfig(
        raw=raw,
        path=path,
        kernel=kernel,
        shape=shape,
        h=float(raw["domain"]["h"]),
        R_trunc=float(raw["domain"]["R_trunc"]),
        node_limit=raw["domain"].get("node_limit"),
        g=_build_g(data_block, shape.dim),
        far_field=_build_far_field(data_block),
        tasks=list(raw["tasks"]),
        out_dir=Path(out_block.get("directory", "out")),
        formats=tuple(out_block.get("formats", ["json", "csv"])),
        basename=out_block.get("basename", "nlplab"),
    )
