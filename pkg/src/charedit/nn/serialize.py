"""Model container file format.

Layout: magic ``CEDM``, little-endian uint32 header length, UTF-8 JSON header,
then the raw little-endian float32 payload of every declared array in layer
order. The header records the format version, the architecture descriptor,
the build seed and the per-layer array shapes, so a file is self-describing
and the round trip is bit-exact.
"""

import json
import struct

import numpy as np

MAGIC = b"CEDM"
FORMAT_VERSION = 1

_family_builders = {}


def register_family(name, builder):
    """Register a model builder keyed by descriptor["family"]."""
    _family_builders[name] = builder


def save_model(path, model):
    layers = []
    payload = []
    for name, layer in model.layer_items():
        entries = []
        for array_name, arr in layer.arrays():
            arr32 = np.ascontiguousarray(arr, dtype="<f4")
            entries.append([array_name, list(arr.shape)])
            payload.append(arr32.tobytes())
        layers.append({"name": name, "kind": layer.kind, "arrays": entries})
    header = {
        "format_version": FORMAT_VERSION,
        "architecture": model.descriptor,
        "seed": model.seed,
        "layers": layers,
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(raw)))
        fh.write(raw)
        for chunk in payload:
            fh.write(chunk)


def read_container(path):
    """Read header and arrays without rebuilding a model."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a model container: bad magic {magic!r}")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported format version {header.get('format_version')}")
        arrays = {}
        for layer in header["layers"]:
            per_layer = {}
            for array_name, shape in layer["arrays"]:
                count = int(np.prod(shape)) if shape else 1
                buf = fh.read(count * 4)
                if len(buf) != count * 4:
                    raise ValueError("truncated model payload")
                per_layer[array_name] = np.frombuffer(buf, dtype="<f4").reshape(shape).copy()
            arrays[layer["name"]] = per_layer
    return header, arrays


def load_model(path):
    """Rebuild a registered model from a container file."""
    header, arrays = read_container(path)
    family = header["architecture"].get("family")
    builder = _family_builders.get(family)
    if builder is None:
        raise ValueError(f"no builder registered for model family {family!r}")
    model = builder(header["architecture"], header.get("seed"))
    for name, layer in model.layer_items():
        layer.load_arrays(arrays[name])
    return model
