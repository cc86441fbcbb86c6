"""File formats for joint distributions: CSV and a raw binary.

CSV layout: comment lines carrying the plane/axis tags, then a header
row with the idler axis values (first cell names the signal axis), then
one row per signal coordinate.  Floats are written with ``repr``
(shortest round-trip form), so identical inputs produce byte-identical
files.

Binary layout (little-endian throughout):

    8 bytes   magic b"SPDCJID1"
    3 float64 signal axis descriptor: min, max, N
    3 float64 idler axis descriptor: min, max, N
    N*M float64 row-major intensity matrix (signal-major)

The binary format carries no plane/axis tags; callers that need them
use the CSV form or supply them on read.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from spdcsim.spectral import JointDistribution

__all__ = [
    "MAGIC",
    "write_jid_csv",
    "read_jid_csv",
    "write_jid_binary",
    "read_jid_binary",
    "write_matrix_csv",
    "write_matrix_binary",
    "read_matrix_binary",
]

MAGIC = b"SPDCJID1"


def write_matrix_csv(
    path: str | Path,
    axis_signal: np.ndarray,
    axis_idler: np.ndarray,
    intensity: np.ndarray,
    meta: dict | None = None,
    signal_label: str = "signal",
) -> None:
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append(",".join([signal_label] + [repr(float(v)) for v in axis_idler]))
    for coord, row in zip(axis_signal, intensity):
        lines.append(",".join([repr(float(coord))] + [repr(float(v)) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_jid_csv(jid: JointDistribution, path: str | Path) -> None:
    write_matrix_csv(
        path,
        jid.axis_signal,
        jid.axis_idler,
        jid.intensity,
        meta={"plane": jid.plane, "axis": jid.axis},
    )


def read_jid_csv(path: str | Path) -> JointDistribution:
    meta = {}
    rows = []
    axis_idler = None
    axis_signal = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            cells = line.split(",")
            if axis_idler is None:
                axis_idler = np.array([float(v) for v in cells[1:]])
                continue
            axis_signal.append(float(cells[0]))
            rows.append([float(v) for v in cells[1:]])
    if axis_idler is None or not rows:
        raise ValueError(f"{path}: no matrix data found")
    return JointDistribution(
        plane=meta.get("plane", "far"),
        axis=meta.get("axis", "x"),
        axis_signal=np.array(axis_signal),
        axis_idler=axis_idler,
        intensity=np.array(rows),
    )


def write_matrix_binary(
    path: str | Path,
    axis_signal: np.ndarray,
    axis_idler: np.ndarray,
    intensity: np.ndarray,
) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        header = np.array(
            [
                axis_signal[0], axis_signal[-1], axis_signal.size,
                axis_idler[0], axis_idler[-1], axis_idler.size,
            ],
            dtype="<f8",
        )
        fh.write(header.tobytes())
        fh.write(np.ascontiguousarray(intensity, dtype="<f8").tobytes())


def read_matrix_binary(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: bad magic, not a joint-distribution file")
    header = np.frombuffer(raw, dtype="<f8", count=6, offset=len(MAGIC))
    n_s, n_i = int(header[2]), int(header[5])
    expected = len(MAGIC) + 6 * 8 + n_s * n_i * 8
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated ({len(raw)} bytes, expected {expected})")
    matrix = np.frombuffer(
        raw, dtype="<f8", count=n_s * n_i, offset=len(MAGIC) + 6 * 8
    ).reshape(n_s, n_i)
    axis_signal = np.linspace(header[0], header[1], n_s)
    axis_idler = np.linspace(header[3], header[4], n_i)
    return axis_signal, axis_idler, matrix.copy()


def write_jid_binary(jid: JointDistribution, path: str | Path) -> None:
    write_matrix_binary(path, jid.axis_signal, jid.axis_idler, jid.intensity)


def read_jid_binary(
    path: str | Path, plane: str = "far", axis: str = "x"
) -> JointDistribution:
    axis_signal, axis_idler, matrix = read_matrix_binary(path)
    return JointDistribution(
        plane=plane, axis=axis,
        axis_signal=axis_signal, axis_idler=axis_idler, intensity=matrix,
    )
