"""Binary checkpoint format.

Layout (little-endian)::

    b"LALN" | u32 version | u32 tensor_count
    per tensor: u16 name_len | name (utf-8) | u8 dtype | u8 ndim | u32 * ndim | payload
    u32 CRC32 of everything before it

dtype tags: 0 = f32, 1 = f64, 2 = i64, 3 = u8. Adam moments are stored as
``adam.m/<name>`` and ``adam.v/<name>``, the step counter as ``adam.step``
(i64) and the model config as UTF-8 JSON in ``meta/config`` (u8).
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..numerics import Tensor
from .config import ModelConfig
from .params import ParamStore

MAGIC = b"LALN"
VERSION = 1
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8"), 2: np.dtype("<i8"), 3: np.dtype("u1")}
_TAGS = {np.dtype(np.float32): 0, np.dtype(np.float64): 1, np.dtype(np.int64): 2, np.dtype(np.uint8): 3}


class CheckpointError(Exception):
    pass


class BadMagicError(CheckpointError):
    pass


class UnsupportedVersionError(CheckpointError):
    pass


class TruncatedCheckpointError(CheckpointError):
    pass


class ChecksumError(CheckpointError):
    pass


def _entries(store: ParamStore):
    for name, t in store.items():
        yield name, t.data
    for name in store.params:
        if name in store.m:
            yield f"adam.m/{name}", store.m[name]
            yield f"adam.v/{name}", store.v[name]
    yield "adam.step", np.array([store.step], dtype=np.int64)
    if store.config is not None:
        blob = json.dumps(store.config.to_dict(), sort_keys=True).encode()
        yield "meta/config", np.frombuffer(blob, dtype=np.uint8)


def dumps(store: ParamStore) -> bytes:
    entries = list(_entries(store))
    parts = [MAGIC, struct.pack("<II", VERSION, len(entries))]
    for name, arr in entries:
        arr = np.asarray(arr)
        if arr.dtype not in _TAGS:
            raise CheckpointError(f"unsupported dtype {arr.dtype} for {name!r}")
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
        parts.append(struct.pack("<BB", _TAGS[arr.dtype], arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(np.ascontiguousarray(arr, dtype=_DTYPES[_TAGS[arr.dtype]]).tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedCheckpointError("unexpected end of checkpoint")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads(buf: bytes) -> ParamStore:
    r = _Reader(buf)
    if r.take(4) != MAGIC:
        raise BadMagicError("bad checkpoint magic (not a LALN file)")
    version, count = r.unpack("<II")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported checkpoint version {version}")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (nlen,) = r.unpack("<H")
        name = r.take(nlen).decode("utf-8")
        tag, ndim = r.unpack("<BB")
        if tag not in _DTYPES:
            raise CheckpointError(f"unknown dtype tag {tag} for {name!r}")
        shape = r.unpack(f"<{ndim}I") if ndim else ()
        dt = _DTYPES[tag]
        nbytes = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
        tensors[name] = np.frombuffer(r.take(nbytes), dtype=dt).reshape(shape).copy()
    body_end = r.pos
    (crc,) = r.unpack("<I")
    if crc != zlib.crc32(buf[:body_end]) & 0xFFFFFFFF:
        raise ChecksumError("checkpoint checksum mismatch")
    if r.pos != len(buf):
        raise CheckpointError("trailing bytes after checkpoint checksum")

    config = None
    if "meta/config" in tensors:
        config = ModelConfig.from_dict(json.loads(tensors.pop("meta/config").tobytes().decode()))
    store = ParamStore(config=config)
    step = tensors.pop("adam.step", np.zeros(1, np.int64))
    store.step = int(step[0])
    for name, arr in tensors.items():
        if name.startswith("adam.m/"):
            store.m[name[7:]] = arr
        elif name.startswith("adam.v/"):
            store.v[name[7:]] = arr
        else:
            store[name] = Tensor(arr)
    return store


def save_checkpoint(store: ParamStore, path) -> None:
    Path(path).write_bytes(dumps(store))


def load_checkpoint(path) -> ParamStore:
    return loads(Path(path).read_bytes())
