"""Versioned agent checkpoints.

Layout: magic, format version, length-prefixed JSON header (config, tensor
table, metadata), then the tensors as little-endian float32 in table order.
Saving a freshly loaded checkpoint reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict

import numpy as np

from ..errors import DataError
from .model import AgentConfig, AgentParameters

MAGIC = b"WNAVAGNT"
FORMAT_VERSION = 1

_U32 = struct.Struct("<I")


def save_checkpoint(
    params: AgentParameters, path: str, meta: dict | None = None
) -> None:
    header = {
        "config": asdict(params.config),
        "tensors": [[name, list(t.shape)] for name, t in params.t.items()],
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_U32.pack(FORMAT_VERSION))
        fh.write(_U32.pack(len(blob)))
        fh.write(blob)
        for t in params.t.values():
            fh.write(np.ascontiguousarray(t, dtype="<f4").tobytes())


def load_checkpoint(path: str) -> tuple[AgentParameters, dict]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[: len(MAGIC)] != MAGIC:
        raise DataError(f"{path}: not an agent checkpoint (bad magic)")
    off = len(MAGIC)
    version = _U32.unpack_from(raw, off)[0]
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    off += 4
    hlen = _U32.unpack_from(raw, off)[0]
    off += 4
    header = json.loads(raw[off : off + hlen].decode("utf-8"))
    off += hlen
    config = AgentConfig(**header["config"])
    tensors: dict[str, np.ndarray] = {}
    for name, shape in header["tensors"]:
        count = int(np.prod(shape)) if shape else 1
        end = off + 4 * count
        if end > len(raw):
            raise DataError(f"{path}: truncated tensor {name}")
        tensors[name] = (
            np.frombuffer(raw[off:end], dtype="<f4")
            .reshape(shape)
            .astype(np.float64)
        )
        off = end
    if off != len(raw):
        raise DataError(f"{path}: trailing bytes after tensors")
    return AgentParameters(config, tensors), header.get("meta", {})
