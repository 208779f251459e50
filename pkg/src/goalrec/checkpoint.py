"""Versioned binary checkpoints of trained models.

File layout (all integers little-endian):

    magic            8 bytes   b"GOALREC\\0"
    format version   uint32
    meta length      uint64
    meta             UTF-8 JSON: {"config": {...}, "vocab_checksum": str,
                                  "history": [[train, val], ...]}
    tensor count     uint32
    per tensor:
        name length  uint16, then the UTF-8 name
        ndim         uint8, then ndim uint64 dimensions
        dtype tag    uint8 (1 = float64)
        payload      raw little-endian values, C order
    trailer          32-byte SHA-256 of everything above

The trailer makes truncation and corruption detectable; loading re-hashes the
body and refuses to return a partial model. Tensors round-trip bit for bit,
so a reloaded model reproduces its predictions exactly.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .domain import DomainVocabulary
from .errors import CheckpointError, IncompatibilityError
from .model import ModelConfig
from .nn import AttentionParams, LstmParams, ModelParams

MAGIC = b"GOALREC\x00"
FORMAT_VERSION = 1
_DTYPE_F64 = 1


@dataclass
class Checkpoint:
    """A trained model plus everything needed to validate and reuse it."""

    config: ModelConfig
    vocab_checksum: str
    params: ModelParams
    history: list[tuple[float, float]] = field(default_factory=list)
    format_version: int = FORMAT_VERSION


def _pack_tensor(name: str, tensor: np.ndarray) -> bytes:
    encoded_name = name.encode("utf-8")
    parts = [struct.pack("<H", len(encoded_name)), encoded_name]
    parts.append(struct.pack("<B", tensor.ndim))
    parts.append(struct.pack(f"<{tensor.ndim}Q", *tensor.shape))
    parts.append(struct.pack("<B", _DTYPE_F64))
    parts.append(np.ascontiguousarray(tensor, dtype="<f8").tobytes())
    return b"".join(parts)


def save_checkpoint(path, checkpoint: Checkpoint) -> None:
    """Write a checkpoint; the file is self-validating via its SHA-256 trailer."""
    meta = json.dumps(
        {
            "config": asdict(checkpoint.config),
            "vocab_checksum": checkpoint.vocab_checksum,
            "history": [list(pair) for pair in checkpoint.history],
        }
    ).encode("utf-8")
    tensors = checkpoint.params.tensors()
    body = [MAGIC, struct.pack("<I", checkpoint.format_version)]
    body.append(struct.pack("<Q", len(meta)))
    body.append(meta)
    body.append(struct.pack("<I", len(tensors)))
    for name, tensor in tensors.items():
        body.append(_pack_tensor(name, tensor))
    blob = b"".join(body)
    with open(path, "wb") as handle:
        handle.write(blob)
        handle.write(hashlib.sha256(blob).digest())


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.blob):
            raise CheckpointError("checkpoint truncated")
        out = self.blob[self.pos : self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _params_from_tensors(tensors: dict[str, np.ndarray]) -> ModelParams:
    required = {
        "embedding", "lstm.w_f", "lstm.w_i", "lstm.w_o", "lstm.w_c",
        "lstm.b_f", "lstm.b_i", "lstm.b_o", "lstm.b_c",
        "attention.w_a", "attention.b_a", "attention.u_ctx", "out.w", "out.b",
    }
    if set(tensors) != required:
        raise CheckpointError(
            f"checkpoint tensor names mismatch: {sorted(set(tensors) ^ required)}"
        )
    hidden = tensors["lstm.b_f"].shape[0]
    params = ModelParams(
        embedding=tensors["embedding"],
        lstm=LstmParams(
            w_f=tensors["lstm.w_f"], w_i=tensors["lstm.w_i"],
            w_o=tensors["lstm.w_o"], w_c=tensors["lstm.w_c"],
            b_f=tensors["lstm.b_f"], b_i=tensors["lstm.b_i"],
            b_o=tensors["lstm.b_o"], b_c=tensors["lstm.b_c"],
            hidden_size=hidden,
            input_size=tensors["embedding"].shape[1],
        ),
        attention=AttentionParams(
            w_a=tensors["attention.w_a"],
            b_a=tensors["attention.b_a"],
            u_ctx=tensors["attention.u_ctx"],
        ),
        out_w=tensors["out.w"],
        out_b=tensors["out.b"],
    )
    params.validate()
    return params


def load_checkpoint(path, vocabulary: DomainVocabulary | None = None) -> Checkpoint:
    """Read and validate a checkpoint.

    Raises CheckpointError on any structural damage and IncompatibilityError
    when the format version is unknown or ``vocabulary`` is given and its
    checksum does not match the one the model was trained against.
    """
    with open(path, "rb") as handle:
        raw = handle.read()
    if len(raw) < len(MAGIC) + 36:
        raise CheckpointError("checkpoint truncated")
    blob, trailer = raw[:-32], raw[-32:]
    if hashlib.sha256(blob).digest() != trailer:
        raise CheckpointError("checkpoint corrupted: checksum trailer does not match")
    reader = _Reader(blob)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (version,) = reader.unpack("<I")
    if version != FORMAT_VERSION:
        raise IncompatibilityError(
            f"checkpoint format version {version} is not supported (expected {FORMAT_VERSION})"
        )
    (meta_len,) = reader.unpack("<Q")
    try:
        meta = json.loads(reader.take(meta_len).decode("utf-8"))
        config = ModelConfig(**meta["config"])
        vocab_checksum = str(meta["vocab_checksum"])
        history = [tuple(pair) for pair in meta["history"]]
    except (json.JSONDecodeError, KeyError, TypeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"checkpoint metadata unreadable: {exc}") from None
    (tensor_count,) = reader.unpack("<I")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(tensor_count):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}Q") if ndim else ()
        (dtype_tag,) = reader.unpack("<B")
        if dtype_tag != _DTYPE_F64:
            raise CheckpointError(f"unknown dtype tag {dtype_tag} for tensor {name}")
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        payload = reader.take(count * 8)
        tensors[name] = np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
    if reader.pos != len(blob):
        raise CheckpointError("checkpoint has trailing garbage")
    if vocabulary is not None and vocabulary.checksum != vocab_checksum:
        raise IncompatibilityError(
            f"checkpoint was trained for vocabulary {vocab_checksum}, "
            f"got {vocabulary.checksum}"
        )
    return Checkpoint(
        config=config,
        vocab_checksum=vocab_checksum,
        params=_params_from_tensors(tensors),
        history=history,
        format_version=version,
    )
