"""Binary checkpoints: generator weights, optimizer moments, step counter.

Layout: magic, little-endian u32 header length, canonical-JSON header
(format version, architecture tag, latent/hidden dims, layer shapes, env
name and config, trainer step), float64 little-endian payload (weights in
declared parameter order, then optimizer moment arrays), and a SHA-256
checksum over header+payload. Loading verifies the checksum and refuses
corrupt files; save/load round-trips are bit-identical.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import IntegrityError
from .generator import PolicyGenerator

MAGIC = b"PSPC"
FORMAT_VERSION = 1


def save_checkpoint(path, gen: PolicyGenerator, optimizer=None, step: int = 0,
                    env_name: str = "", env_config: dict | None = None,
                    extra: dict | None = None):
    weights = gen.get_flat()
    moments = optimizer.state_arrays() if optimizer is not None else []
    header = {
        "format_version": FORMAT_VERSION,
        "generator": gen.describe(),
        "layer_shapes": [list(p.data.shape) for p in gen.parameters()],
        "weight_count": int(weights.size),
        "moment_shapes": [list(m.shape) for m in moments],
        "optimizer_step": int(optimizer.t) if optimizer is not None else 0,
        "step": int(step),
        "env": env_name,
        "env_config": env_config or {},
        "extra": extra or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    payload = weights.astype("<f8").tobytes()
    for m in moments:
        payload += m.astype("<f8").ravel().tobytes()
    digest = hashlib.sha256(header_bytes + payload).digest()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(header_bytes).to_bytes(4, "little"))
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(digest)


class LoadedCheckpoint:
    def __init__(self, header: dict, generator: PolicyGenerator, moments: list, step: int):
        self.header = header
        self.generator = generator
        self.moments = moments
        self.step = step

    @property
    def env_name(self) -> str:
        return self.header.get("env", "")

    @property
    def env_config(self) -> dict:
        return self.header.get("env_config", {})

    def restore_optimizer(self, optimizer):
        if self.moments:
            optimizer.load_state(self.moments, self.header.get("optimizer_step", 0))


def load_checkpoint(path) -> LoadedCheckpoint:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC or len(blob) < 40:
        raise IntegrityError(f"{path}: not a checkpoint file")
    header_len = int.from_bytes(blob[4:8], "little")
    header_bytes = blob[8:8 + header_len]
    payload = blob[8 + header_len:-32]
    digest = blob[-32:]
    if hashlib.sha256(header_bytes + payload).digest() != digest:
        raise IntegrityError(f"{path}: checksum mismatch, refusing to load")
    header = json.loads(header_bytes)
    if header.get("format_version") != FORMAT_VERSION:
        raise IntegrityError(f"{path}: unsupported format version "
                             f"{header.get('format_version')!r}")
    gen = PolicyGenerator.from_description(header["generator"])
    flat = np.frombuffer(payload, dtype="<f8")
    n = header["weight_count"]
    gen.set_flat(flat[:n].astype(np.float64))
    moments = []
    offset = n
    for shape in header["moment_shapes"]:
        size = int(np.prod(shape)) if shape else 1
        moments.append(flat[offset:offset + size].reshape(shape).astype(np.float64).copy())
        offset += size
    if offset != flat.size:
        raise IntegrityError(f"{path}: payload size mismatch")
    return LoadedCheckpoint(header, gen, moments, header.get("step", 0))
