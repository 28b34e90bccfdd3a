"""Binary model container.

Layout (all little-endian)::

    4s   magic  b"RTEQ"
    u32  format version (1)
    u32  kind tag (0 = mlp, 1 = forest)
    u32  input_dim
    u32  output_dim
    ...  kind payload

MLP payload: ``u32 n_sizes``, ``n_sizes x u32`` layer sizes, then the flat
float64 parameter vector (per layer: weights row-major ``(fan_in, fan_out)``,
then biases).

Forest payload: ``u32 n_estimators``; then for each output column and each
estimator: ``u32 n_nodes`` followed by ``i64 feature[n]``, ``f64 threshold[n]``,
``i64 left[n]``, ``i64 right[n]``, ``f64 value[n]``.
"""

import struct

import numpy as np

from .forest import RandomForestRegressor, Tree
from .mlp import MLPRegressor

MAGIC = b"RTEQ"
VERSION = 1
KIND_TAGS = {"mlp": 0, "forest": 1}


class ModelFormatError(ValueError):
    pass


def to_bytes(model):
    head = MAGIC + struct.pack("<IIII", VERSION, KIND_TAGS[model.kind], model.input_dim, model.output_dim)
    if model.kind == "mlp":
        body = struct.pack("<I", len(model.sizes)) + struct.pack(f"<{len(model.sizes)}I", *model.sizes)
        body += model.params.astype("<f8").tobytes()
        return head + body
    parts = [struct.pack("<I", len(model.trees[0]) if model.trees else 0)]
    for col in model.trees:
        for t in col:
            parts.append(struct.pack("<I", t.n_nodes))
            parts.append(t.feature.astype("<i8").tobytes())
            parts.append(t.threshold.astype("<f8").tobytes())
            parts.append(t.left.astype("<i8").tobytes())
            parts.append(t.right.astype("<i8").tobytes())
            parts.append(t.value.astype("<f8").tobytes())
    return head + b"".join(parts)


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise ModelFormatError("model file is truncated")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype, count):
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).astype(dt.newbyteorder("="))


def from_bytes(buf):
    r = _Reader(buf)
    if r.take(4) != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, tag, din, dout = r.unpack("<IIII")
    if version != VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    if tag == KIND_TAGS["mlp"]:
        (count,) = r.unpack("<I")
        sizes = r.unpack(f"<{count}I")
        if count < 2 or sizes[0] != din or sizes[-1] != dout:
            raise ModelFormatError("layer sizes disagree with header dims")
        model = MLPRegressor(sizes)
        model.params[:] = r.array("<f8", model.params.size)
    elif tag == KIND_TAGS["forest"]:
        (n_est,) = r.unpack("<I")
        model = RandomForestRegressor(din, dout)
        model.trees = []
        for _ in range(dout):
            col = []
            for _ in range(n_est):
                (nn,) = r.unpack("<I")
                col.append(Tree(
                    r.array("<i8", nn), r.array("<f8", nn), r.array("<i8", nn),
                    r.array("<i8", nn), r.array("<f8", nn),
                ))
            model.trees.append(col)
    else:
        raise ModelFormatError(f"unknown model kind tag {tag}")
    if r.pos != len(buf):
        raise ModelFormatError("trailing bytes after model payload")
    return model


def save(model, path):
    with open(path, "wb") as fh:
        fh.write(to_bytes(model))


def load(path):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
