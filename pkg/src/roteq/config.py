"""Run configuration: JSON file, versioned schema, paper defaults pre-filled."""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace

from .predictors import ForestConfig, MlpConfig

SCHEMA_VERSION = 1
CASE_NAMES = ("newtonian", "les", "third_order", "electrostriction")
MODEL_KINDS = ("mlp", "forest")
DESK_N = (2000, 10000)
FULL_N = tuple(range(10000, 100001, 10000))
OUTPUT_ENV = "ROTEQ_OUTPUT_DIR"


@dataclass(frozen=True)
class RunConfig:
    case: str = "newtonian"
    model: str = "mlp"
    arm: str = "roteqnet"
    N: int = 10000
    seed: int = 0
    mu: float = 1.0
    third_order_identity: str = "levi_civita"
    rotation_count: int = 10000
    output_dir: str = "runs"
    mlp: MlpConfig = field(default_factory=MlpConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)
    # reproduce grid
    cases: tuple = CASE_NAMES
    models: tuple = ("mlp",)
    n_list: tuple = DESK_N
    seeds: tuple = (0, 1, 2)

    def __post_init__(self):
        if self.case not in CASE_NAMES:
            raise ValueError(f"case must be one of {CASE_NAMES}")
        if self.model not in MODEL_KINDS:
            raise ValueError(f"model must be one of {MODEL_KINDS}")
        if self.arm not in ("baseline", "roteqnet", "standard_only"):
            raise ValueError("arm must be baseline, roteqnet or standard_only")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.rotation_count < 1:
            raise ValueError("rotation_count must be >= 1")
        if any(c not in CASE_NAMES for c in self.cases):
            raise ValueError(f"cases must be drawn from {CASE_NAMES}")
        if any(m not in MODEL_KINDS for m in self.models):
            raise ValueError(f"models must be drawn from {MODEL_KINDS}")
        if any(n < 1 for n in self.n_list):
            raise ValueError("every N in n_list must be >= 1")

    def case_params(self, case=None):
        case = case or self.case
        if case == "newtonian":
            return {"mu": self.mu}
        if case == "third_order":
            return {"mu": self.mu, "identity": self.third_order_identity}
        return {}

    def kernel_config(self, model=None, seed=None):
        model = model or self.model
        seed = self.seed if seed is None else seed
        base = self.mlp if model == "mlp" else self.forest
        return replace(base, seed=seed)

    def to_dict(self):
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        for key in ("cases", "models", "n_list", "seeds"):
            d[key] = list(d[key])
        d["mlp"]["hidden_sizes"] = list(d["mlp"]["hidden_sizes"])
        return d


def resolve_output_dir(cfg):
    return os.environ.get(OUTPUT_ENV) or cfg.output_dir


def from_dict(d):
    d = dict(d)
    version = d.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported config schema_version {version}")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "mlp" in d:
        m = dict(d["mlp"])
        if "hidden_sizes" in m:
            m["hidden_sizes"] = tuple(m["hidden_sizes"])
        d["mlp"] = MlpConfig(**m)
    if "forest" in d:
        d["forest"] = ForestConfig(**d["forest"])
    for key in ("cases", "models", "n_list", "seeds"):
        if key in d:
            d[key] = tuple(d[key])
    return RunConfig(**d)


def load_config(path=None, **overrides):
    """Read a JSON config (empty/absent -> all defaults) and apply non-None overrides."""
    data = {}
    if path:
        with open(path) as fh:
            text = fh.read().strip()
        data = json.loads(text) if text else {}
    cfg = from_dict(data)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(obj):
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]
