"""Flat binary storage for trained networks.

Layout::

    b"AIRCASTN"              8-byte magic
    uint32 little-endian      format version
    uint32 little-endian      header length in bytes
    header                    UTF-8 JSON: spec, input shape, scalers, histories,
                              and a manifest of (name, shape, offset) per tensor
    payload                   concatenated little-endian float64 tensors
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..dataset import ScalerState
from ..errors import AircastError
from .network import NetworkFit, NetworkSpec

MAGIC = b"AIRCASTN"
VERSION = 1
_PREFIX = struct.Struct("<8sII")


class ModelFormatError(AircastError, ValueError):
    pass


def dumps(fit: NetworkFit) -> bytes:
    manifest = []
    chunks = []
    offset = 0
    for name in sorted(fit.params):
        arr = np.ascontiguousarray(fit.params[name], dtype="<f8")
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(arr.tobytes())
        offset += arr.size
    header = {
        "spec": fit.spec.to_dict(),
        "input_shape": list(fit.input_shape),
        "tensors": manifest,
        "train_loss_history": [float(v) for v in fit.train_loss_history],
        "validation_loss_history": [float(v) for v in fit.validation_loss_history],
        "target_scaler": None if fit.target_scaler is None else fit.target_scaler.to_dict(),
        "feature_scaler": None if fit.feature_scaler is None else fit.feature_scaler.to_dict(),
        "clip_events": fit.clip_events,
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    return _PREFIX.pack(MAGIC, VERSION, len(raw)) + raw + b"".join(chunks)


def loads(blob: bytes) -> NetworkFit:
    if len(blob) < _PREFIX.size:
        raise ModelFormatError("file too short for a model header")
    magic, version, hlen = _PREFIX.unpack_from(blob)
    if magic != MAGIC:
        raise ModelFormatError("not an aircast model file")
    if version != VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    start = _PREFIX.size
    try:
        header = json.loads(blob[start:start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt header: {exc}") from exc
    if start + hlen > len(blob) or (len(blob) - start - hlen) % 8:
        raise ModelFormatError("payload is truncated")
    try:
        return _from_header(header, np.frombuffer(blob, dtype="<f8", offset=start + hlen))
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"incomplete header: {exc!r}") from exc


def _from_header(header: dict, payload: np.ndarray) -> NetworkFit:
    params = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape, dtype=int))
        lo = entry["offset"]
        if lo + size > payload.size:
            raise ModelFormatError(f"tensor {entry['name']} runs past the end of the file")
        params[entry["name"]] = payload[lo:lo + size].reshape(shape).astype(float)
    ts, fs = header["target_scaler"], header["feature_scaler"]
    return NetworkFit(
        spec=NetworkSpec(**header["spec"]),
        params=params,
        input_shape=tuple(header["input_shape"]),
        train_loss_history=np.array(header["train_loss_history"], dtype=float),
        validation_loss_history=np.array(header["validation_loss_history"], dtype=float),
        target_scaler=None if ts is None else ScalerState.from_dict(ts),
        feature_scaler=None if fs is None else ScalerState.from_dict(fs),
        clip_events=header["clip_events"],
    )


def save_network(fit: NetworkFit, path) -> None:
    Path(path).write_bytes(dumps(fit))


def load_network(path) -> NetworkFit:
    return loads(Path(path).read_bytes())
