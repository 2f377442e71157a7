"""Binary model files.

Layout (all integers little-endian)::

    b"COVPARSE"                      magic
    uint32                           format version
    uint64 + bytes                   metadata, canonical JSON (UTF-8)
    uint32                           number of tensors
    per tensor:
        uint16 + bytes               name
        uint8                        rank
        uint32 * rank                shape
        float32 * prod(shape)        values, row-major

Parameters are trained in float64 and stored as float32.
"""
from __future__ import annotations

import io
import json
import struct
from pathlib import Path
from typing import IO, Union

import numpy as np

from .scorer import ExternalEmbeddings, Hyperparams, Model, Vocabulary

__all__ = ["MAGIC", "FORMAT_VERSION", "ModelFormatError", "save_model", "load_model", "model_bytes"]

MAGIC = b"COVPARSE"
FORMAT_VERSION = 1
_EXTERNAL = "external.vectors"

PathOrStream = Union[str, Path, IO[bytes]]


class ModelFormatError(ValueError):
    pass


def _metadata(model: Model) -> dict:
    return {
        "hyperparams": model.hyper.to_dict(),
        "vocab": model.vocab.to_dict(),
        "channels": {
            "xpos": model.xpos_table is not None,
            "feats": model.feats_table is not None,
            "external": model.external is not None,
        },
        "external_words": model.external.words if model.external is not None else [],
    }


def _canonical_json(data: dict) -> bytes:
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def model_bytes(model: Model) -> bytes:
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<I", FORMAT_VERSION))
    meta = _canonical_json(_metadata(model))
    out.write(struct.pack("<Q", len(meta)))
    out.write(meta)
    tensors = [(name, t.value) for name, t in model.named_parameters()]
    if model.external is not None:
        tensors.append((_EXTERNAL, model.external.vectors))
    out.write(struct.pack("<I", len(tensors)))
    for name, value in tensors:
        raw = name.encode("utf-8")
        out.write(struct.pack("<H", len(raw)))
        out.write(raw)
        out.write(struct.pack("<B", value.ndim))
        out.write(struct.pack(f"<{value.ndim}I", *value.shape))
        out.write(np.ascontiguousarray(value, dtype="<f4").tobytes())
    return out.getvalue()


def save_model(model: Model, target: PathOrStream) -> None:
    data = model_bytes(model)
    if isinstance(target, (str, Path)):
        Path(target).write_bytes(data)
    else:
        target.write(data)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise ModelFormatError("truncated model file")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_model(source: PathOrStream) -> Model:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    r = _Reader(data)
    if r.take(len(MAGIC)) != MAGIC:
        raise ModelFormatError("not a covparse model file (bad magic)")
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"model format version {version} is not supported (expected {FORMAT_VERSION})")
    (meta_len,) = r.unpack("<Q")
    meta = json.loads(r.take(meta_len).decode("utf-8"))
    (count,) = r.unpack("<I")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode("utf-8")
        (rank,) = r.unpack("<B")
        shape = r.unpack(f"<{rank}I")
        size = int(np.prod(shape)) if rank else 1
        values = np.frombuffer(r.take(4 * size), dtype="<f4").astype(np.float64).reshape(shape)
        tensors[name] = values
    if r.pos != len(data):
        raise ModelFormatError("trailing bytes after the last tensor")

    hyper = Hyperparams.from_dict(meta["hyperparams"])
    vocab = Vocabulary.from_dict(meta["vocab"])
    external = None
    if meta["channels"]["external"]:
        external = ExternalEmbeddings(meta["external_words"], tensors.pop(_EXTERNAL))
    # build a skeleton with the right shapes, then overwrite every tensor
    model = Model.init(hyper, vocab, np.random.default_rng(0), external)
    expected = model.named_parameters()
    if [n for n, _ in expected] != list(tensors):
        raise ModelFormatError("tensor names in the file do not match the model layout")
    for name, tensor in expected:
        value = tensors[name]
        if value.shape != tensor.shape:
            raise ModelFormatError(f"tensor {name} has shape {value.shape}, expected {tensor.shape}")
        tensor.value = value.copy()
    return model


def same_parameters(a: Model, b: Model) -> bool:
    pa, pb = a.named_parameters(), b.named_parameters()
    return [n for n, _ in pa] == [n for n, _ in pb] and all(
        np.array_equal(x.value, y.value) for (_, x), (_, y) in zip(pa, pb)
    )
