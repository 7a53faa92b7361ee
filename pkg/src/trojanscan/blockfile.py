"""Single-file container for numeric artifacts.

Layout: 4 magic bytes | u32 version | u32 header length | UTF-8 JSON header
| raw little-endian array blocks | trailing u32 CRC-32 of everything before
it. The header records block names/shapes/dtypes in order plus a free-form
``meta`` dict, so the same container backs model files, perturbation
artifacts and fingerprints. Writing is canonical (sorted JSON keys, fixed
separators): identical content yields identical bytes.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

_U32 = struct.Struct("<I")

_DTYPES = {"float32": "<f4", "float64": "<f8", "int64": "<i8"}


class BlockFileError(Exception):
    """Base class for container read failures."""


class BadMagicError(BlockFileError):
    pass


class VersionError(BlockFileError):
    pass


class TruncatedError(BlockFileError):
    pass


class ChecksumError(BlockFileError):
    pass


def dumps(magic: bytes, version: int, meta: dict, blocks) -> bytes:
    """Serialize ``blocks`` (sequence of (name, ndarray)) with ``meta``."""
    if len(magic) != 4:
        raise ValueError("magic must be exactly 4 bytes")
    entries = []
    payload = bytearray()
    for name, arr in blocks:
        arr = np.asarray(arr)
        if arr.dtype.name not in _DTYPES:
            raise ValueError(f"unsupported block dtype {arr.dtype} for {name!r}")
        entries.append({"name": name, "shape": list(arr.shape), "dtype": arr.dtype.name})
        payload += np.ascontiguousarray(arr).astype(_DTYPES[arr.dtype.name], copy=False).tobytes()
    header = json.dumps({"meta": meta, "blocks": entries},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = magic + _U32.pack(version) + _U32.pack(len(header)) + header + bytes(payload)
    return body + _U32.pack(zlib.crc32(body) & 0xFFFFFFFF)


def loads(data: bytes, magic: bytes, version: int):
    """Parse container bytes; returns (meta, {name: array})."""
    if len(data) < 4:
        raise TruncatedError("file shorter than magic")
    if data[:4] != magic:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {magic!r}")
    if len(data) < 12:
        raise TruncatedError("file truncated inside fixed header")
    (ver,) = _U32.unpack_from(data, 4)
    if ver != version:
        raise VersionError(f"format version {ver}, reader supports {version}")
    (hlen,) = _U32.unpack_from(data, 8)
    if len(data) < 12 + hlen + 4:
        raise TruncatedError("file truncated inside JSON header")
    (crc_stored,) = _U32.unpack_from(data, len(data) - 4)
    crc_actual = zlib.crc32(data[:-4]) & 0xFFFFFFFF
    try:
        header = json.loads(data[12:12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        if crc_actual != crc_stored:
            raise ChecksumError("checksum mismatch (corrupted header)") from exc
        raise BlockFileError(f"malformed header: {exc}") from exc
    offset = 12 + hlen
    arrays = {}
    for entry in header["blocks"]:
        dt = np.dtype(_DTYPES[entry["dtype"]])
        count = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
        nbytes = count * dt.itemsize
        if offset + nbytes > len(data) - 4:
            raise TruncatedError(f"block {entry['name']!r} truncated")
        arr = np.frombuffer(data, dtype=dt, count=count, offset=offset)
        arrays[entry["name"]] = arr.reshape(entry["shape"]).astype(entry["dtype"])
        offset += nbytes
    if offset != len(data) - 4:
        raise TruncatedError("trailing bytes beyond declared blocks")
    if crc_actual != crc_stored:
        raise ChecksumError("checksum mismatch")
    return header["meta"], arrays


def write(path, magic: bytes, version: int, meta: dict, blocks) -> None:
    data = dumps(magic, version, meta, blocks)
    with open(path, "wb") as fh:
        fh.write(data)


def read(path, magic: bytes, version: int):
    with open(path, "rb") as fh:
        return loads(fh.read(), magic, version)
