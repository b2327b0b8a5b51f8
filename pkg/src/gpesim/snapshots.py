"""Binary wavefunction snapshots.

Layout (all little endian):

    magic  b"GPES"
    format version   uint32
    ndim             uint32
    points per axis  ndim * uint32
    half extents     ndim * float64
    timestamp        float64
    payload          points-product * (re, im) float64 pairs, row major

A 1D header is therefore 4 + 4 + 4 + 4 + 8 + 8 = 32 bytes.  The payload is
exactly the complex128 memory layout, so round trips are bit exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import ComplexField, GridSpec

MAGIC = b"GPES"
FORMAT_VERSION = 1


class SnapshotError(ValueError):
    """Corrupt, truncated or foreign snapshot file."""


def write_snapshot(path, field: ComplexField, timestamp: float = 0.0) -> None:
    grid = field.grid
    header = bytearray()
    header += MAGIC
    header += struct.pack("<II", FORMAT_VERSION, grid.ndim)
    header += struct.pack(f"<{grid.ndim}I", *grid.points)
    header += struct.pack(f"<{grid.ndim}d", *grid.half_extents, )
    header += struct.pack("<d", float(timestamp))
    payload = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    with open(path, "wb") as handle:
        handle.write(bytes(header))
        handle.write(payload)


def read_snapshot(path) -> tuple[ComplexField, float]:
    """Read a snapshot; returns (field, timestamp)."""
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:4] != MAGIC:
        raise SnapshotError(f"bad magic {data[:4]!r}, not a snapshot file")
    offset = 4
    try:
        version, ndim = struct.unpack_from("<II", data, offset)
        offset += 8
        if version != FORMAT_VERSION:
            raise SnapshotError(f"unsupported snapshot version {version}")
        if ndim not in (1, 2, 3):
            raise SnapshotError(f"invalid dimension count {ndim}")
        points = struct.unpack_from(f"<{ndim}I", data, offset)
        offset += 4 * ndim
        half_extents = struct.unpack_from(f"<{ndim}d", data, offset)
        offset += 8 * ndim
        (timestamp,) = struct.unpack_from("<d", data, offset)
        offset += 8
    except struct.error:
        raise SnapshotError("truncated snapshot header") from None

    count = int(np.prod(points))
    expected = count * 16
    payload = data[offset:]
    if len(payload) != expected:
        raise SnapshotError(
            f"payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype="<c16").reshape(points)
    grid = GridSpec(half_extents, points)
    return ComplexField(grid, values.astype(np.complex128)), float(timestamp)
