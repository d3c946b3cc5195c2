"""Versioned binary checkpoint container.

Layout (all integers little-endian):

    bytes 0-7    magic ``PLABCKPT``
    bytes 8-11   format version (uint32, currently 1)
    bytes 12-19  manifest length in bytes (uint64)
    manifest     UTF-8 JSON: {"meta": {...}, "params":
                 [{"name", "shape", "offset"}, ...]}
    payload      concatenated float64 little-endian arrays; each
                 parameter starts at its manifest offset relative to
                 the payload start
"""

import json

import numpy as np

MAGIC = b"PLABCKPT"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, params, meta=None):
    """Write name -> float64 array mappings plus a JSON meta block."""
    entries = []
    offset = 0
    payloads = []
    for name in sorted(params):
        arr = np.asarray(params[name], dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape),
                        "offset": offset})
        raw = arr.astype("<f8").tobytes()
        payloads.append(raw)
        offset += len(raw)
    manifest = json.dumps({"meta": meta or {}, "params": entries},
                          sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(VERSION.to_bytes(4, "little"))
        f.write(len(manifest).to_bytes(8, "little"))
        f.write(manifest)
        for raw in payloads:
            f.write(raw)


def load_checkpoint(path):
    """Returns (dict name -> float64 array, meta dict)."""
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != MAGIC:
            raise CheckpointError(f"bad magic {magic!r} in {path}")
        version = int.from_bytes(f.read(4), "little")
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        m_len = int.from_bytes(f.read(8), "little")
        manifest = json.loads(f.read(m_len).decode("utf-8"))
        payload = f.read()
    params = {}
    for entry in manifest["params"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(payload, dtype="<f8", count=count,
                            offset=start).reshape(shape)
        params[entry["name"]] = arr.astype(np.float64).copy()
    return params, manifest["meta"]
