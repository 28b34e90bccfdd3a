"""Synthetic systems with exact, rotation-equivariant labels.

Each case draws its inputs from standard normals, computes labels from a closed
form law, and splits 85/15 into train/test.
"""

import csv
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .linalg import random_rotations
from .standardize import standardize_batch
from .tensor import TupleLayout, index_labels, kronecker3, levi_civita, rotate_batch, symmetrize_batch

TRAIN_FRACTION = 0.85
LES_CS = 0.4
LES_DELTA = 0.4
LES_C1 = 1.0
LES_C2 = 1.0

DATASET_MAGIC = b"RTDS"
DATASET_VERSION = 1


def _newtonian_sample(rng, n, **_):
    p = rng.standard_normal(n)
    grad_v = rng.standard_normal((n, 3, 3))
    s = grad_v + grad_v.transpose(0, 2, 1)
    return p[:, None], {"S": s}


def _newtonian_law(scalars, tensors, mu=1.0, **_):
    p = scalars[:, 0]
    return -p[:, None, None] * np.eye(3) + mu * tensors["S"]


def _les_sample(rng, n, **_):
    g = rng.standard_normal((n, 3, 3))
    tr = np.trace(g, axis1=1, axis2=2)
    g = g - (tr / 3.0)[:, None, None] * np.eye(3)
    return np.zeros((n, 0)), {"G": g}


def _les_law(scalars, tensors, **_):
    g = tensors["G"]
    s = 0.5 * (g + g.transpose(0, 2, 1))
    w = 0.5 * (g - g.transpose(0, 2, 1))
    ss = np.einsum("nij,nij->n", s, s)
    s2 = s @ s
    term1 = 2.0 * np.sqrt(2.0 * ss)[:, None, None] * s
    term2 = LES_C1 * (s2 - (ss / 3.0)[:, None, None] * np.eye(3))
    term3 = LES_C2 * (s @ w - w @ s)
    return -((LES_CS * LES_DELTA) ** 2) * (term1 + term2 + term3)


def _third_order_sample(rng, n, **_):
    p = rng.standard_normal(n)
    a = symmetrize_batch(rng.standard_normal((n, 3, 3, 3)))
    return p[:, None], {"A": a}


IDENTITIES3 = {"levi_civita": levi_civita, "kronecker": kronecker3}


def _third_order_law(scalars, tensors, mu=1.0, identity="levi_civita", **_):
    eye3 = IDENTITIES3[identity]()
    p = scalars[:, 0]
    return -p[:, None, None, None] * eye3 + mu * tensors["A"]


def _electrostriction_sample(rng, n, **_):
    v = symmetrize_batch(rng.standard_normal((n, 3, 3, 3, 3)))
    pol = rng.standard_normal((n, 3))
    s = pol[:, :, None] * pol[:, None, :]
    return np.zeros((n, 0)), {"V": v, "S": s}


def _electrostriction_law(scalars, tensors, **_):
    return np.einsum("nijkl,nkl->nij", tensors["V"], tensors["S"])


@dataclass(frozen=True)
class CaseStudy:
    name: str
    case_id: int
    layout: TupleLayout
    label_name: str
    label_order: int
    sampler: object
    law: object

    @property
    def label_size(self):
        return 3**self.label_order

    def label_columns(self):
        return index_labels(self.label_name, self.label_order)

    def labels(self, scalars, tensors, **params):
        return self.law(scalars, tensors, **params)


CASES = {
    "newtonian": CaseStudy(
        "newtonian", 1, TupleLayout(("p",), (("S", 2),), "S"), "sigma", 2,
        _newtonian_sample, _newtonian_law,
    ),
    "les": CaseStudy(
        "les", 2, TupleLayout((), (("G", 2),), "G"), "tau", 2, _les_sample, _les_law,
    ),
    "third_order": CaseStudy(
        "third_order", 3, TupleLayout(("p",), (("A", 3),), "A"), "sigma", 3,
        _third_order_sample, _third_order_law,
    ),
    "electrostriction": CaseStudy(
        "electrostriction", 4, TupleLayout((), (("V", 4), ("S", 2)), "V"), "T", 2,
        _electrostriction_sample, _electrostriction_law,
    ),
}


def get_case(name):
    try:
        return CASES[name]
    except KeyError:
        raise ValueError(f"unknown case {name!r}; choose from {sorted(CASES)}") from None


@dataclass
class Dataset:
    case: str
    features: np.ndarray
    labels: np.ndarray
    train: np.ndarray
    test: np.ndarray
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def study(self):
        return get_case(self.case)

    @property
    def layout(self):
        return self.study.layout

    def __len__(self):
        return len(self.features)

    def subset(self, which):
        idx = self.train if which == "train" else self.test
        return self.features[idx], self.labels[idx]

    def label_tensors(self, rows=None):
        y = self.labels if rows is None else self.labels[rows]
        return y.reshape((len(y),) + (3,) * self.study.label_order)

    def check_consistency(self):
        """Largest deviation between stored labels and the law applied to stored features."""
        scalars, tensors = self.layout.split(self.features)
        y = self.study.labels(scalars, tensors, **self.params).reshape(len(self), -1)
        return float(np.max(np.abs(y - self.labels), initial=0.0))


def split_indices(n, seed, case_id):
    rng = np.random.default_rng([seed, case_id, 1])
    perm = rng.permutation(n)
    n_train = int(round(TRAIN_FRACTION * n))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def draw(case, n, rng, **params):
    """Raw (scalars, tensors, labels) for ``n`` fresh samples."""
    study = get_case(case)
    scalars, tensors = study.sampler(rng, n, **params)
    return scalars, tensors, study.labels(scalars, tensors, **params)


def generate(case, n, seed, **params):
    if n < 1:
        raise ValueError("N must be >= 1")
    study = get_case(case)
    rng = np.random.default_rng([seed, study.case_id])
    scalars, tensors, labels = draw(case, n, rng, **params)
    features = study.layout.join(scalars, tensors)
    train, test = split_indices(n, seed, study.case_id)
    return Dataset(case, features, labels.reshape(n, -1), train, test, int(seed), dict(params))


def generate_newtonian(n, seed, mu=1.0):
    return generate("newtonian", n, seed, mu=mu)


def generate_les(n, seed):
    return generate("les", n, seed)


def generate_third_order(n, seed, mu=1.0, identity="levi_civita"):
    if identity not in IDENTITIES3:
        raise ValueError(f"identity must be one of {sorted(IDENTITIES3)}")
    return generate("third_order", n, seed, mu=mu, identity=identity)


def generate_electrostriction(n, seed):
    return generate("electrostriction", n, seed)


@dataclass
class RotationEvalSet:
    """One base sample and a set of rotations applied to it (inputs and label alike)."""

    case: str
    scalars: np.ndarray  # (1, n_scalars)
    tensors: dict  # name -> (1, 3, ..)
    label: np.ndarray  # (1, 3, ..)
    rotations: np.ndarray  # (count, 3, 3)
    seed: int
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rotations)

    def base_features(self):
        return get_case(self.case).layout.join(self.scalars, self.tensors)

    def rotated_inputs(self):
        """Rotated tuples as ``(scalars, tensors)`` batches of length ``count``."""
        n = len(self.rotations)
        scalars = np.repeat(self.scalars, n, axis=0)
        tensors = {
            name: rotate_batch(np.repeat(t, n, axis=0), self.rotations)
            for name, t in self.tensors.items()
        }
        return scalars, tensors

    def rotated_features(self):
        scalars, tensors = self.rotated_inputs()
        return get_case(self.case).layout.join(scalars, tensors)

    def rotated_labels(self):
        n = len(self.rotations)
        return rotate_batch(np.repeat(self.label, n, axis=0), self.rotations).reshape(n, -1)


def build_rotation_eval(case, seed, count=10000, require_nondegenerate=True, rotations=None,
                        max_tries=1000, **params):
    if count < 1:
        raise ValueError("count must be >= 1")
    study = get_case(case)
    rng = np.random.default_rng([seed, study.case_id, 2])
    for _ in range(max_tries):
        scalars, tensors, label = draw(case, 1, rng, **params)
        if not require_nondegenerate:
            break
        if not standardize_batch(scalars, tensors, study.layout.anchor).degenerate[0]:
            break
    else:
        raise RuntimeError("could not draw a non-degenerate base sample")
    if rotations is None:
        rotations = random_rotations(rng, count)
    return RotationEvalSet(case, scalars, tensors, label, np.asarray(rotations, float), int(seed), dict(params))


def write_dataset(ds, path):
    """Binary dataset: magic, u32 version, u32 header length, JSON header, f64 blocks, i64 splits."""
    study = ds.study
    header = {
        "case": ds.case,
        "N": len(ds),
        "seed": ds.seed,
        "params": ds.params,
        "layout": study.layout.to_dict(),
        "label": {"name": study.label_name, "order": study.label_order},
        "d_in": ds.features.shape[1],
        "d_out": ds.labels.shape[1],
        "n_train": len(ds.train),
        "n_test": len(ds.test),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(DATASET_MAGIC + struct.pack("<II", DATASET_VERSION, len(blob)) + blob)
        fh.write(ds.features.astype("<f8").tobytes())
        fh.write(ds.labels.astype("<f8").tobytes())
        fh.write(ds.train.astype("<i8").tobytes())
        fh.write(ds.test.astype("<i8").tobytes())


def read_dataset(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != DATASET_MAGIC:
        raise ValueError(f"{path}: not a dataset file")
    version, hlen = struct.unpack("<II", buf[4:12])
    if version != DATASET_VERSION:
        raise ValueError(f"{path}: unsupported dataset version {version}")
    header = json.loads(buf[12:12 + hlen])
    n, din, dout = header["N"], header["d_in"], header["d_out"]
    sizes = [n * din * 8, n * dout * 8, header["n_train"] * 8, header["n_test"] * 8]
    if len(buf) != 12 + hlen + sum(sizes):
        raise ValueError(f"{path}: dataset file has the wrong length")
    pos = 12 + hlen
    blocks = []
    for size, dt in zip(sizes, ("<f8", "<f8", "<i8", "<i8")):
        blocks.append(np.frombuffer(buf[pos:pos + size], dtype=dt).astype(dt[1:]))
        pos += size
    ds = Dataset(
        header["case"], blocks[0].reshape(n, din), blocks[1].reshape(n, dout),
        blocks[2], blocks[3], header["seed"], header["params"],
    )
    if ds.layout.to_dict() != header["layout"]:
        raise ValueError(f"{path}: layout does not match case {ds.case!r}")
    return ds


def export_csv(ds, path):
    study = ds.study
    split = np.empty(len(ds), dtype=object)
    split[ds.train] = "train"
    split[ds.test] = "test"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["split"] + study.layout.column_names() + study.label_columns())
        for i in range(len(ds)):
            w.writerow([split[i]] + [repr(float(v)) for v in ds.features[i]]
                       + [repr(float(v)) for v in ds.labels[i]])
