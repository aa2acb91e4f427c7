"""Run configuration files and deterministic output artifacts."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .analysis import Dip, MagnitudeMap
from .coherence import CoherenceCurve
from .errors import InvalidParameterError

HEADER_TAG = "# ddsense "


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"{source}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def embedded_config(text: str) -> tuple[str, dict[str, str]]:
    """Command name and resolved config echoed in an output file header."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER_TAG):
        raise InvalidParameterError("not a ddsense output file")
    command = lines[0][len(HEADER_TAG):].strip()
    cfg = {}
    for line in lines[1:]:
        if not line.startswith("# "):
            break
        body = line[2:]
        if "=" in body:
            key, value = body.split("=", 1)
            cfg[key] = value
    return command, cfg


def load_config(path) -> tuple[str | None, dict[str, str]]:
    """Read a config file, or the embedded config of a previous output file."""
    text = Path(path).read_text()
    if text.startswith(HEADER_TAG):
        return embedded_config(text)
    if text.lstrip().startswith("{"):
        try:
            body = json.loads(text)
            return body.get("command"), dict(body["config"])
        except (ValueError, KeyError, TypeError, AttributeError):
            raise InvalidParameterError(f"{path}: not a ddsense JSON output") from None
    return None, parse_config_text(text, str(path))


def header_lines(command: str, config: Mapping[str, object]) -> list[str]:
    lines = [f"{HEADER_TAG}{command}"]
    lines += [f"# {k}={fmt(v)}" for k, v in sorted(config.items()) if v is not None]
    return lines


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_rows(header: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = list(header) + [",".join(columns)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def format_curve(header: Sequence[str], curve: CoherenceCurve) -> str:
    return format_rows(header, ("tau_us", "L"), zip(curve.tau_values * 1e6, curve.l_values))


def format_dips(header: Sequence[str], dips: Sequence[Dip]) -> str:
    rows = [(d.tau_center * 1e6, d.depth, d.width * 1e6, d.zone_label or "") for d in dips]
    return format_rows(header, ("tau_us", "depth", "width_us", "zone"), rows)


def format_map(header: Sequence[str], mmap: MagnitudeMap, kind: str = "csv",
               config: Mapping[str, object] | None = None) -> str:
    if kind == "json":
        body = {"command": header[0][len(HEADER_TAG):] if header else None,
                "d_par_nm": [fmt_num(v * 1e9) for v in mmap.d_par_axis],
                "d_perp_nm": [fmt_num(v * 1e9) for v in mmap.d_perp_axis],
                "values": [[fmt_num(v) for v in row] for row in mmap.values],
                "signed": mmap.signed,
                "config": {k: fmt(v) for k, v in sorted((config or {}).items()) if v is not None}}
        return json.dumps(body, indent=1) + "\n"
    if kind != "csv":
        raise InvalidParameterError(f"unknown map format {kind!r}")
    lines = list(header)
    lines.append(",".join(["d_par_nm\\d_perp_nm"] + [fmt(v * 1e9) for v in mmap.d_perp_axis]))
    for x, row in zip(mmap.d_par_axis, mmap.values):
        lines.append(",".join([fmt(x * 1e9)] + [fmt(v) for v in row]))
    return "\n".join(lines) + "\n"


def fmt_num(v: float) -> float:
    return float(f"{float(v):.12g}")


def read_map(path) -> MagnitudeMap:
    """Load a map written by :func:`format_map` (CSV or JSON)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        body = json.loads(text)
        return MagnitudeMap(np.asarray(body["d_par_nm"]) * 1e-9,
                            np.asarray(body["d_perp_nm"]) * 1e-9,
                            np.asarray(body["values"]), dict(body.get("config", {})),
                            signed=bool(body.get("signed", False)))
    params = embedded_config(text)[1] if text.startswith(HEADER_TAG) else {}
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if len(rows) < 2:
        raise InvalidParameterError(f"{path}: no map data")
    d_perp = np.array([float(v) for v in rows[0].split(",")[1:]]) * 1e-9
    body = np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]])
    signed = bool(np.any(body[:, 1:] < 0)) or params.get("signed") == "True"
    return MagnitudeMap(body[:, 0] * 1e-9, d_perp, body[:, 1:], params, signed=signed)
