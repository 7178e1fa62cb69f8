import hashlib
import dataclasses
from pathlib import Path

import numpy as np

CHUNK_SIZE = 1 << 16


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file's content."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _canonical(value) -> str:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        parts = [f"{f.name}={_canonical(getattr(value, f.name))}" for f in dataclasses.fields(value)]
        return f"{type(value).__name__}({','.join(parts)})"
    if isinstance(value, np.ndarray):
        data = np.ascontiguousarray(value)
        return f"array{data.shape}:{hashlib.sha256(data.tobytes()).hexdigest()}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canonical(v) for v in value) + "]"
    if isinstance(value, float):
        return value.hex()
    if isinstance(value, complex):
        return f"{value.real.hex()}{value.imag.hex()}j"
    return repr(value)


def descriptor_hash(obj) -> str:
    """Short stable hash of an emitter state (or any dataclass) for file headers."""
    return hashlib.sha256(_canonical(obj).encode()).hexdigest()[:16]
