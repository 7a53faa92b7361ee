"""Model file format.

A bundle of one or more named graphs in a single blockfile (magic ``TSNN``,
version 1): JSON header with layer specs/shapes/metadata, float32
little-endian parameter blocks in canonical order, trailing CRC-32.
Round-trips are bit-exact.
"""

from __future__ import annotations

from dataclasses import asdict

import numpy as np

from .. import blockfile
from . import layers as L
from .model import ModelGraph

MAGIC = b"TSNN"
VERSION = 1

# re-export the failure taxonomy for callers
ModelFormatError = blockfile.BlockFileError
VersionError = blockfile.VersionError
TruncatedError = blockfile.TruncatedError
ChecksumError = blockfile.ChecksumError


def _layer_to_json(layer) -> dict:
    d = {"kind": layer.kind}
    d.update(asdict(layer))
    return d


def _layer_from_json(d: dict):
    d = dict(d)
    cls = L.LAYER_KINDS[d.pop("kind")]
    return cls(**d)


def _graph_header(model: ModelGraph) -> dict:
    return {
        "input_shape": list(model.input_shape),
        "num_classes": model.num_classes,
        "layers": [_layer_to_json(l) for l in model.layers],
        "meta": model.meta,
    }


def bundle_to_bytes(graphs: dict[str, ModelGraph], metadata: dict | None = None) -> bytes:
    names = sorted(graphs)
    header = {"graphs": {n: _graph_header(graphs[n]) for n in names},
              "metadata": metadata or {}}
    blocks = []
    for n in names:
        for i, pname, arr in graphs[n].param_items():
            if arr.dtype != np.float32:
                raise ValueError(f"model parameters must be float32, got {arr.dtype}")
            blocks.append((f"{n}/{i}/{pname}", arr))
    return blockfile.dumps(MAGIC, VERSION, header, blocks)


def bundle_from_bytes(data: bytes):
    header, arrays = blockfile.loads(data, MAGIC, VERSION)
    graphs = {}
    for n, gh in header["graphs"].items():
        layer_list = [_layer_from_json(d) for d in gh["layers"]]
        params: dict[int, dict[str, np.ndarray]] = {}
        for i, layer in enumerate(layer_list):
            shapes = L.param_shapes(layer)
            if not shapes:
                continue
            group = {}
            for pname, shape in shapes.items():
                arr = arrays[f"{n}/{i}/{pname}"]
                if tuple(arr.shape) != shape:
                    raise ModelFormatError(
                        f"parameter {n}/{i}/{pname} has shape {arr.shape}, expected {shape}")
                group[pname] = arr
            params[i] = group
        graphs[n] = ModelGraph(layer_list, params, tuple(gh["input_shape"]),
                               int(gh["num_classes"]), meta=dict(gh.get("meta", {})))
    return graphs, header.get("metadata", {})


def save_bundle(path, graphs: dict[str, ModelGraph], metadata: dict | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(bundle_to_bytes(graphs, metadata))


def load_bundle(path):
    with open(path, "rb") as fh:
        return bundle_from_bytes(fh.read())


def save_model(path, model: ModelGraph, metadata: dict | None = None) -> None:
    save_bundle(path, {"main": model}, metadata)


def load_model(path) -> ModelGraph:
    graphs, _ = load_bundle(path)
    return graphs["main"]
