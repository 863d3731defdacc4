"""File formats: channel-set container, CSV tables and run manifests.

Channel sets
    A binary container.  The file starts with the 8-byte magic
    ``b"IFTRCHS1"``, a little-endian ``uint32`` header length and a UTF-8
    JSON header holding the scenario name, the frequency grid and one
    ``[row, col, azimuth, roll]`` record per channel.  The payload follows:
    ``n_channels * n_points`` complex samples as little-endian float64
    pairs ``(re, im)``, channel after channel.

Tables
    Comma-separated text with one header row.  Floats are written with 17
    significant digits (always with a decimal point or exponent), ints as
    plain integers and missing values as empty cells, so reading a table
    back returns the very same values.  Text cells must not look like
    numbers.

Manifests
    Indented JSON describing how an output directory was produced.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _stdio
import json
import math
import re
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .channel_lab import ChannelMeta, ChannelResponse, ChannelSelector, ChannelSet, FrequencyGrid

__all__ = [
    "MAGIC",
    "FormatError",
    "write_channel_set",
    "read_channel_set",
    "export_channel_set_text",
    "format_value",
    "parse_value",
    "write_table",
    "table_text",
    "read_table",
    "RunManifest",
    "file_digest",
    "config_digest",
    "write_manifest",
    "read_manifest",
    "MANIFEST_NAME",
]

MAGIC = b"IFTRCHS1"
MANIFEST_NAME = "manifest.json"
_INT_RE = re.compile(r"^[+-]?\d+$")


class FormatError(ValueError):
    """A file does not follow the expected layout."""


# ---------------------------------------------------------------------------
# Channel sets
# ---------------------------------------------------------------------------

def write_channel_set(path, cs: ChannelSet) -> Path:
    """Write a channel set to the binary container format."""
    path = Path(path)
    records = []
    for ch in cs.channels:
        if ch.meta.rx is None or ch.meta.tx is None:
            raise FormatError("only unmerged channels with position and orientation can be stored")
        records.append([ch.meta.rx[0], ch.meta.rx[1], ch.meta.tx[0], ch.meta.tx[1]])
    header = {
        "scenario": cs.scenario,
        "f_start": cs.grid.f_start,
        "f_step": cs.grid.f_step,
        "n_points": cs.grid.n_points,
        "channels": records,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    data = np.empty((len(cs.channels), cs.grid.n_points, 2), dtype="<f8")
    for i, ch in enumerate(cs.channels):
        data[i, :, 0] = ch.h.real
        data[i, :, 1] = ch.h.imag
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(data.tobytes())
    return path


def read_channel_set(path) -> ChannelSet:
    """Read a channel set written by :func:`write_channel_set`."""
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise FormatError(f"{path}: not a channel-set file")
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated header")
    (size,) = struct.unpack("<I", raw[8:12])
    try:
        header = json.loads(raw[12:12 + size].decode("utf-8"))
        grid = FrequencyGrid(float(header["f_start"]), float(header["f_step"]), int(header["n_points"]))
        records = header["channels"]
        scenario = str(header["scenario"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed header ({exc})") from exc
    payload = raw[12 + size:]
    expected = len(records) * grid.n_points * 16
    if len(payload) != expected:
        raise FormatError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype="<f8").reshape(len(records), grid.n_points, 2)
    channels = []
    for rec, block in zip(records, data):
        row, col, az, roll = (int(v) for v in rec)
        meta = ChannelMeta.of(scenario, ChannelSelector(row, col, az, roll))
        channels.append(ChannelResponse(grid, block[:, 0] + 1j * block[:, 1], meta))
    return ChannelSet(scenario, grid, channels)


def export_channel_set_text(path, cs: ChannelSet) -> Path:
    """Long-format CSV export: one row per channel and frequency point."""
    f = cs.grid.frequencies()
    rows = []
    for ch in cs.channels:
        row, col = ch.meta.rx
        az, roll = ch.meta.tx
        for k in range(cs.grid.n_points):
            rows.append((row, col, az, roll, float(f[k]), float(ch.h[k].real), float(ch.h[k].imag)))
    return write_table(path, ("row", "col", "azimuth", "roll", "freq_hz", "re", "im"), rows)


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

def format_value(v) -> str:
    """Text form of a table cell (17 significant digits for floats)."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        s = format(x, ".17g")
        if "." not in s and "e" not in s:
            s += ".0"
        return s
    return str(v)


def parse_value(s: str):
    """Inverse of :func:`format_value`."""
    if s == "":
        return None
    if _INT_RE.match(s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        return s


def _write_rows(fh, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    ncol = len(columns)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if len(row) != ncol:
            raise FormatError(f"row has {len(row)} cells, header has {ncol}")
        w.writerow([format_value(v) for v in row])


def table_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """The text :func:`write_table` would write."""
    buf = _stdio.StringIO()
    _write_rows(buf, columns, rows)
    return buf.getvalue()


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV table with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(fh, columns, rows)
    return path


def read_table(path) -> tuple[list[str], list[list[Any]]]:
    """Read a table written by :func:`write_table`: ``(columns, rows)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty table") from None
        rows = []
        for line in reader:
            if len(line) != len(columns):
                raise FormatError(f"{path}: ragged row {reader.line_num}")
            rows.append([parse_value(s) for s in line])
    return columns, rows


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------

def file_digest(path) -> str:
    """SHA-256 hex digest of a file."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_digest(config: dict) -> str:
    """SHA-256 hex digest of a configuration in canonical JSON form."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Provenance record of one CLI run.

    ``inputs`` and ``outputs`` map paths (relative to the output directory
    for outputs) to SHA-256 digests.  The digests of the numeric outputs
    are reproducible; only the timestamps differ between identical runs.
    """

    command: str
    seed: int | None
    config: dict
    config_digest: str
    version: str
    started: str = field(default_factory=_now)
    finished: str = ""
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    status: str = "ok"

    def finish(self, out_dir, outputs: Iterable, inputs: Iterable = (), status: str = "ok") -> None:
        out_dir = Path(out_dir)
        self.inputs = {str(p): file_digest(p) for p in inputs}
        self.outputs = {str(Path(p).relative_to(out_dir)): file_digest(p) for p in sorted(map(Path, outputs))}
        self.finished = _now()
        self.status = status


def write_manifest(out_dir, manifest: RunManifest) -> Path:
    """Write ``manifest.json`` into an output directory."""
    path = Path(out_dir) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(out_dir) -> RunManifest:
    """Load the manifest of an output directory."""
    data = json.loads((Path(out_dir) / MANIFEST_NAME).read_text(encoding="utf-8"))
    return RunManifest(**data)

