"""Checkpoint container: magic "CSK1", length-prefixed JSON manifest
(name, dtype, shape, byte-offset per array + an embedded config object),
then raw little-endian array payloads. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"CSK1"


def save_checkpoint(path, arrays: dict[str, np.ndarray], config: dict) -> None:
    entries = []
    offset = 0
    names = sorted(arrays)
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(arrays[name])
        le = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        blob = le.tobytes()
        entries.append(
            {
                "name": name,
                "dtype": le.dtype.str,
                "shape": list(arr.shape),
                "offset": offset,
            }
        )
        blobs.append(blob)
        offset += len(blob)
    manifest = json.dumps({"format_version": 1, "config": config, "arrays": entries}).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(manifest)))
        f.write(manifest)
        for blob in blobs:
            f.write(blob)


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a CSK1 checkpoint (magic {data[:4]!r})")
    (mlen,) = struct.unpack("<I", data[4:8])
    manifest = json.loads(data[8 : 8 + mlen].decode("utf-8"))
    base = 8 + mlen
    arrays = {}
    for entry in manifest["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = base + entry["offset"]
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=start).reshape(shape)
        arrays[entry["name"]] = arr.copy()
    return arrays, manifest["config"]
