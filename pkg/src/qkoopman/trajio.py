"""Trajectory dataset container and its on-disk binary format.

Binary layout (all little-endian):
    magic   7 bytes  b"QKTRAJ\\0"
    version u32      1
    kind    u8       0 = raw state snapshots, 1 = latent (r, phi) planes
    rank    u8       number of axes of one snapshot
    dims    rank*u64 snapshot shape
    T       u64      step count (file holds T+1 snapshots)
    dt      f64      uniform time step
    nmeta   u32      metadata pair count
    pairs   (u32 len + utf-8 bytes) for key, then value, repeated
    payload (T+1) * prod(dims) f64, time-major, row-major

A CSV import path accepts one snapshot per file plus a manifest naming the
files in time order together with the time step.
"""

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, ShapeError

__all__ = ["TrajectoryDataset", "write_trajectory", "read_trajectory", "read_csv_manifest"]

MAGIC = b"QKTRAJ\0"
VERSION = 1
_KINDS = {"raw": 0, "latent": 1}
_KIND_NAMES = {v: k for k, v in _KINDS.items()}


@dataclass(frozen=True)
class TrajectoryDataset:
    """T+1 uniformly spaced snapshots plus free-form string metadata."""

    snapshots: np.ndarray
    dt: float
    metadata: dict = field(default_factory=dict)
    kind: str = "raw"

    def __post_init__(self):
        snaps = np.ascontiguousarray(self.snapshots, dtype=np.float64)
        if snaps.ndim < 2:
            raise ShapeError("snapshots must have a leading time axis plus field axes")
        if not np.all(np.isfinite(snaps)):
            raise ShapeError("snapshots contain non-finite values")
        if self.dt <= 0:
            raise ShapeError(f"dt must be positive, got {self.dt}")
        if self.kind not in _KINDS:
            raise ShapeError(f"kind must be one of {sorted(_KINDS)}, got {self.kind!r}")
        snaps = snaps.copy()
        snaps.setflags(write=False)
        object.__setattr__(self, "snapshots", snaps)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def steps(self) -> int:
        return self.snapshots.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.snapshots.shape[1:]


def write_trajectory(path, ds: TrajectoryDataset) -> None:
    path = Path(path)
    shape = ds.shape
    header = bytearray()
    header += MAGIC
    header += struct.pack("<I", VERSION)
    header += struct.pack("<BB", _KINDS[ds.kind], len(shape))
    header += struct.pack(f"<{len(shape)}Q", *shape)
    header += struct.pack("<Qd", ds.steps, ds.dt)
    items = sorted(ds.metadata.items())
    header += struct.pack("<I", len(items))
    for key, value in items:
        for text in (str(key), str(value)):
            raw = text.encode("utf-8")
            header += struct.pack("<I", len(raw)) + raw
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(ds.snapshots.tobytes())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, count: int, what: str) -> bytes:
        if self.pos + count > len(self.data):
            raise FormatError(
                f"truncated file: needed {count} bytes for {what} at offset {self.pos}, "
                f"only {len(self.data) - self.pos} available"
            )
        chunk = self.data[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def unpack(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size, what))


def read_trajectory(path) -> TrajectoryDataset:
    with open(path, "rb") as fh:
        data = fh.read()
    rd = _Reader(data)
    if rd.take(len(MAGIC), "magic") != MAGIC:
        raise FormatError(f"bad magic at offset 0 in {path}")
    (version,) = rd.unpack("<I", "version")
    if version != VERSION:
        raise FormatError(f"unsupported version {version} at offset {len(MAGIC)}")
    kind_code, rank = rd.unpack("<BB", "kind/rank")
    if kind_code not in _KIND_NAMES:
        raise FormatError(f"unknown payload kind {kind_code}")
    shape = rd.unpack(f"<{rank}Q", "dims") if rank else ()
    steps, dt = rd.unpack("<Qd", "steps/dt")
    (nmeta,) = rd.unpack("<I", "metadata count")
    metadata = {}
    for _ in range(nmeta):
        (klen,) = rd.unpack("<I", "metadata key length")
        key = rd.take(klen, "metadata key").decode("utf-8")
        (vlen,) = rd.unpack("<I", "metadata value length")
        metadata[key] = rd.take(vlen, "metadata value").decode("utf-8")
    count = (steps + 1) * int(np.prod(shape, dtype=np.int64))
    expected = count * 8
    actual = len(data) - rd.pos
    if actual != expected:
        raise FormatError(
            f"payload length mismatch: expected {expected} bytes, found {actual}"
        )
    snaps = np.frombuffer(rd.take(expected, "payload"), dtype="<f8").reshape(
        (steps + 1,) + tuple(int(s) for s in shape)
    )
    return TrajectoryDataset(
        snapshots=snaps, dt=dt, metadata=metadata, kind=_KIND_NAMES[kind_code]
    )


def read_csv_manifest(manifest_path) -> TrajectoryDataset:
    """Import a trajectory from per-snapshot CSV files.

    The manifest's first non-empty line is ``dt <value>``; every following
    line names one snapshot file (relative to the manifest), in time order.
    """
    manifest_path = Path(manifest_path)
    lines = [
        ln.strip()
        for ln in manifest_path.read_text(encoding="utf-8").splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines or not lines[0].startswith("dt"):
        raise FormatError("manifest must start with a 'dt <value>' line")
    try:
        dt = float(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise FormatError(f"bad dt line: {lines[0]!r}") from exc
    if len(lines) < 2:
        raise FormatError("manifest lists no snapshot files")
    snaps = []
    for name in lines[1:]:
        with open(manifest_path.parent / name, newline="", encoding="utf-8") as fh:
            rows = [[float(cell) for cell in row] for row in csv.reader(fh) if row]
        if not rows:
            raise FormatError(f"empty snapshot file {name}")
        arr = np.asarray(rows, dtype=np.float64)
        snaps.append(arr[:, 0] if arr.shape[1] == 1 else arr)
    shapes = {s.shape for s in snaps}
    if len(shapes) != 1:
        raise FormatError(f"snapshot files disagree on shape: {sorted(shapes)}")
    return TrajectoryDataset(snapshots=np.stack(snaps), dt=dt)
