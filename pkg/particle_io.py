"""Particle files (CSV with lattice metadata) and JSON documents."""

from __future__ import annotations

import io
import json
import re
from pathlib import Path
from typing import Any

import pandas as pd

from exceptions import InvalidInputError
from geom import Frame, LatticePoint, Point2
from graph import Configuration

LATTICE_LINE = re.compile(r"^#\s*lattice:\s*(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s*$")


def _lattice_header(frame: Frame) -> str:
    return f"# lattice: {frame.origin.x!r} {frame.origin.y!r} {frame.theta!r} {frame.spacing!r}"


def format_particles(c: Configuration) -> str:
    """CSV text: lattice frame lines, then `x,y` plus `a,b[,frame]` when provenance is known."""
    frames = list(c.frames)
    lines = [_lattice_header(frame) for frame in frames]
    table = pd.DataFrame({"x": c.coords[:, 0], "y": c.coords[:, 1]})
    if frames:
        provenance = c.lattice
        table["a"] = pd.array([lp.a if lp is not None else None for lp in provenance], dtype="Int64")
        table["b"] = pd.array([lp.b if lp is not None else None for lp in provenance], dtype="Int64")
        if len(frames) > 1 or not c.is_exact:
            index = {frame: k for k, frame in enumerate(frames)}
            table["frame"] = pd.array([index[lp.frame] if lp is not None else None for lp in provenance], dtype="Int64")
    body = table.to_csv(index=False, lineterminator="\n", float_format=None)
    return "\n".join(lines + [body.rstrip("\n")]) + "\n"


def write_particles(path: str | Path, c: Configuration) -> None:
    Path(path).write_text(format_particles(c), encoding="utf-8")


def parse_particles(text: str, epsilon: float, tolerance: float | None = None) -> Configuration:
    """Configuration from CSV text; ε always comes from the caller."""
    frames: list[Frame] = []
    for line in text.splitlines():
        if not line.startswith("#"):
            continue
        match = LATTICE_LINE.match(line)
        if match is None:
            continue
        try:
            ox, oy, theta, spacing = (float(v) for v in match.groups())
            frames.append(Frame(Point2(ox, oy), theta, spacing))
        except ValueError as exc:
            raise InvalidInputError(f"bad lattice line {line!r}: {exc}") from exc
    try:
        table = pd.read_csv(io.StringIO(text), comment="#", float_precision="round_trip", skip_blank_lines=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as exc:
        raise InvalidInputError(f"cannot parse particle file: {exc}") from exc
    if list(table.columns[:2]) != ["x", "y"]:
        raise InvalidInputError(f"particle file header must start with x,y, got {list(table.columns)}")
    try:
        coords = table[["x", "y"]].astype(float).to_numpy()
    except ValueError as exc:
        raise InvalidInputError(f"non-numeric particle coordinates: {exc}") from exc

    lattice = None
    if {"a", "b"} <= set(table.columns):
        if not frames:
            raise InvalidInputError("lattice columns a,b need a '# lattice:' line")
        frame_ids = table["frame"] if "frame" in table.columns else pd.Series([0] * len(table))
        lattice = []
        for a, b, k in zip(table["a"], table["b"], frame_ids):
            if pd.isna(a) or pd.isna(b):
                lattice.append(None)
                continue
            k = 0 if pd.isna(k) else int(k)
            if not 0 <= k < len(frames):
                raise InvalidInputError(f"particle refers to unknown lattice frame {k}")
            if float(a) != int(a) or float(b) != int(b):
                raise InvalidInputError(f"lattice coordinates must be integers, got ({a}, {b})")
            lattice.append(LatticePoint(int(a), int(b), frames[k]))
    return Configuration(tuple(Point2(x, y) for x, y in coords), epsilon, tolerance, tuple(lattice) if lattice else None)


def read_particles(path: str | Path, epsilon: float, tolerance: float | None = None) -> Configuration:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    return parse_particles(text, epsilon, tolerance)


def dump_json(document: Any) -> str:
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc
