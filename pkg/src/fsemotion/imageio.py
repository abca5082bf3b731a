"""Binary magnitude-image files and the plain-text dataset manifest.

Image file layout (all little-endian)::

    bytes 0-7    magic  b"FSEIMG01"
    bytes 8-11   ny     uint32
    bytes 12-15  nx     uint32
    bytes 16-19  dtype  uint32, 1 = float32
    bytes 20-23  reserved, zero
    bytes 24-    ny * nx float32 values, row-major
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = [
    "DatasetManifest",
    "FormatError",
    "HEADER_SIZE",
    "ManifestRecord",
    "atomic_write",
    "export_image",
    "image_bytes",
    "load_image",
    "read_manifest",
    "write_manifest",
]

MAGIC = b"FSEIMG01"
DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<8sIII4s")
HEADER_SIZE = _HEADER.size  # 24
MANIFEST_VERSION = "1"
RECORD_FIELDS = (
    "sample_id",
    "pipeline",
    "seed",
    "angles_deg",
    "clean_path",
    "clean_bytes",
    "corrupt_path",
    "corrupt_bytes",
    "ssim",
    "nrmse",
)


class FormatError(ValueError):
    """Malformed image file or manifest."""


def image_bytes(img) -> bytes:
    """Serialized file contents for a real 2D magnitude image."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        raise ValueError("export magnitudes, not complex data")
    ny, nx = arr.shape
    header = _HEADER.pack(MAGIC, ny, nx, DTYPE_FLOAT32, b"\0\0\0\0")
    return header + np.ascontiguousarray(arr, dtype="<f4").tobytes()


def atomic_write(path, payload: bytes) -> None:
    """Write via a temporary sibling file and rename into place."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def export_image(img, path) -> int:
    """Write ``img`` as float32; returns the file length in bytes."""
    payload = image_bytes(img)
    atomic_write(path, payload)
    return len(payload)


def load_image(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, ny, nx, dtype, reserved = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if dtype != DTYPE_FLOAT32:
        raise FormatError(f"{path}: unsupported dtype code {dtype}")
    if reserved != b"\0\0\0\0":
        raise FormatError(f"{path}: reserved header field is not zero")
    expected = HEADER_SIZE + 4 * ny * nx
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for {ny}x{nx}, found {len(data)}")
    return np.frombuffer(data, dtype="<f4", offset=HEADER_SIZE).reshape(ny, nx).astype(np.float32)


@dataclass(frozen=True)
class ManifestRecord:
    sample_id: int
    pipeline: str
    seed: int
    angles_deg: tuple[float, ...]
    clean_path: str
    clean_bytes: int
    corrupt_path: str
    corrupt_bytes: int
    ssim: float
    nrmse: float

    def to_line(self) -> str:
        values = (
            str(self.sample_id),
            self.pipeline,
            str(self.seed),
            ";".join(repr(float(a)) for a in self.angles_deg),
            self.clean_path,
            str(self.clean_bytes),
            self.corrupt_path,
            str(self.corrupt_bytes),
            repr(float(self.ssim)),
            repr(float(self.nrmse)),
        )
        return ",".join(values)

    @classmethod
    def from_line(cls, line: str) -> "ManifestRecord":
        parts = line.split(",")
        if len(parts) != len(RECORD_FIELDS):
            raise FormatError(f"manifest record has {len(parts)} fields, expected {len(RECORD_FIELDS)}: {line!r}")
        try:
            return cls(
                sample_id=int(parts[0]),
                pipeline=parts[1],
                seed=int(parts[2]),
                angles_deg=tuple(float(a) for a in parts[3].split(";") if a),
                clean_path=parts[4],
                clean_bytes=int(parts[5]),
                corrupt_path=parts[6],
                corrupt_bytes=int(parts[7]),
                ssim=float(parts[8]),
                nrmse=float(parts[9]),
            )
        except ValueError as exc:
            raise FormatError(f"bad manifest record {line!r}: {exc}") from None


@dataclass
class DatasetManifest:
    config: dict
    records: list[ManifestRecord] = field(default_factory=list)
    status: str = "complete"
    completed_samples: int = 0
    version: str = MANIFEST_VERSION

    def to_text(self) -> str:
        lines = [
            f"format_version: {self.version}",
            f"status: {self.status}",
            f"completed_samples: {self.completed_samples}",
        ]
        lines += [f"config.{k}: {v}" for k, v in self.config.items()]
        lines.append("records:")
        lines.append(",".join(RECORD_FIELDS))
        lines += [r.to_line() for r in self.records]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DatasetManifest":
        lines = text.splitlines()
        header: dict[str, str] = {}
        it = iter(enumerate(lines))
        for _, line in it:
            if line == "records:":
                break
            key, sep, value = line.partition(": ")
            if not sep:
                raise FormatError(f"bad manifest header line {line!r}")
            header[key] = value
        else:
            raise FormatError("manifest has no records section")
        columns = next(it, (None, None))[1]
        if columns != ",".join(RECORD_FIELDS):
            raise FormatError(f"unexpected record columns {columns!r}")
        version = header.pop("format_version", None)
        if version != MANIFEST_VERSION:
            raise FormatError(f"unsupported manifest version {version!r}")
        config = {k[len("config."):]: v for k, v in header.items() if k.startswith("config.")}
        return cls(
            config=config,
            records=[ManifestRecord.from_line(line) for _, line in it if line],
            status=header.get("status", "complete"),
            completed_samples=int(header.get("completed_samples", 0)),
            version=version,
        )


def write_manifest(manifest: DatasetManifest, out_dir, name: str = "manifest.txt") -> Path:
    path = Path(out_dir) / name
    atomic_write(path, manifest.to_text().encode("utf-8"))
    return path


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.txt"
    return DatasetManifest.from_text(path.read_text(encoding="utf-8"))


def verify_files(manifest: DatasetManifest, root) -> Optional[str]:
    """First inconsistency between manifest and files on disk, or ``None``."""
    root = Path(root)
    for rec in manifest.records:
        for rel, size in ((rec.clean_path, rec.clean_bytes), (rec.corrupt_path, rec.corrupt_bytes)):
            p = root / rel
            if not p.is_file():
                return f"missing file {rel}"
            if p.stat().st_size != size:
                return f"{rel}: {p.stat().st_size} bytes on disk, manifest says {size}"
    return None
