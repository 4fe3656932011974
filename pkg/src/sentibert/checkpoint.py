"""Versioned binary checkpoint: a JSON header (config, labels, vocab,
seed, tensor index) followed by named little-endian float32 payloads.

Layout: 4-byte little-endian header length, the UTF-8 header JSON, then the
tensor payloads back to back in index order. In-memory math is float64, so
a round trip perturbs parameters by at most the float32 quantization step
(< 1e-6 absolute for desk-scale weight magnitudes).
"""

import json
import struct

import numpy as np

from .encoder import EncoderConfig
from .errors import CheckpointError
from .model import SentimentModel
from .tokenizer import Vocab

FORMAT_VERSION = 1


def save_checkpoint(model: SentimentModel, path: str) -> None:
    params = model.named_parameters()
    index = []
    offset = 0
    for name in sorted(params):
        shape = list(params[name].data.shape)
        nbytes = int(np.prod(shape)) * 4
        index.append({"name": name, "shape": shape, "offset": offset, "nbytes": nbytes})
        offset += nbytes
    header = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "labels": list(model.labels),
        "seed": model.seed,
        "vocab_tokens": model.vocab.tokens(),
        "vocab_hash": model.vocab.content_hash(),
        "tensors": index,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for entry in index:
            fh.write(np.ascontiguousarray(params[entry["name"]].data, dtype="<f4").tobytes())


def _read_header(blob: bytes) -> tuple[dict, bytes]:
    if len(blob) < 4:
        raise CheckpointError("checkpoint too short to hold a header length")
    (header_len,) = struct.unpack("<I", blob[:4])
    if len(blob) < 4 + header_len:
        raise CheckpointError("checkpoint header is truncated")
    try:
        header = json.loads(blob[4 : 4 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"checkpoint header is not valid JSON: {exc}") from exc
    return header, blob[4 + header_len :]


def load_checkpoint(path: str) -> SentimentModel:
    """Rebuild a model, verifying version, every tensor shape, and payload bounds."""
    with open(path, "rb") as fh:
        blob = fh.read()
    header, payload = _read_header(blob)

    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version!r} (reader supports {FORMAT_VERSION})")
    try:
        vocab = Vocab(header["vocab_tokens"])
        config = EncoderConfig.from_dict(header["config"])
        seed = int(header["seed"])
        labels = tuple(header["labels"])
        index = header["tensors"]
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"checkpoint header is missing required fields: {exc}") from exc
    if vocab.content_hash() != header.get("vocab_hash"):
        raise CheckpointError("vocab hash in header does not match the embedded vocabulary")

    model = SentimentModel.init(vocab, config, seed)
    model.labels = labels
    expected = model.named_parameters()
    seen = set()
    arrays: dict[str, np.ndarray] = {}
    for entry in index:
        name = entry["name"]
        if name not in expected:
            raise CheckpointError(f"checkpoint tensor {name!r} is not a model parameter")
        shape = tuple(entry["shape"])
        want = expected[name].data.shape
        if shape != want:
            raise CheckpointError(f"checkpoint tensor {name!r} has shape {shape}, expected {want}")
        nbytes = int(np.prod(shape)) * 4
        if entry["nbytes"] != nbytes:
            raise CheckpointError(f"checkpoint tensor {name!r} declares {entry['nbytes']} bytes, expected {nbytes}")
        start, end = entry["offset"], entry["offset"] + nbytes
        if start < 0 or end > len(payload):
            raise CheckpointError(f"checkpoint payload is truncated at tensor {name!r}")
        arrays[name] = np.frombuffer(payload[start:end], dtype="<f4").reshape(shape).astype(np.float64)
        seen.add(name)
    missing = sorted(set(expected) - seen)
    if missing:
        raise CheckpointError(f"checkpoint is missing tensors: {', '.join(missing)}")
    model.load_snapshot(arrays)
    return model
