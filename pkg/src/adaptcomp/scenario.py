"""Scenario files: loading, validation, hashing and saving.

A scenario is one JSON document.  Matrices are row-major nested arrays and
the model block states its dimensions explicitly so shape errors are caught
with a field name::

    {
      "name": "vA",
      "policy": "greedy_finite",
      "m": 2,
      "model": {"N": 2, "K": 2, "L": 2,
                "H": [[1, 0], [0, 1]], "P0": [[16, 0], [0, 16]],
                "Rnn": [[0, 0], [0, 0]], "Rww": [[1, 0], [0, 1]]},
      "actions": {"labels": ["Diag(1,0)"], "items": [[[1, 0], [0, 0]]]}
    }

Optional keys: ``mu`` inside ``model``; ``schedule`` (action indices cycled by
the alternating policy); ``subset`` (0-based eigenvector indices for the
subset-optimality check); ``seed``; ``grid_resolution``; ``output`` with
``path`` and ``format``.
"""

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import AdaptCompError, ConfigError
from .model import GaussianSignalModel
from .oracle import FiniteActionSet
from .scalar_greedy import scalar_noise_levels

POLICIES = ("greedy_scalar", "greedy_finite", "alternating", "waterfill",
            "blockfill", "oracle_exhaustive", "oracle_grid")
SCALAR_POLICIES = {"greedy_scalar", "waterfill", "blockfill", "oracle_grid"}
ACTION_POLICIES = {"greedy_finite", "alternating", "oracle_exhaustive"}

_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_vector = {"type": "array", "items": {"type": "number"}}

SCHEMA = {
    "type": "object",
    "required": ["policy", "m", "model"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "policy": {"enum": list(POLICIES)},
        "m": {"type": "integer", "minimum": 0},
        "model": {
            "type": "object",
            "required": ["N", "K", "L", "H", "P0", "Rnn", "Rww"],
            "additionalProperties": False,
            "properties": {
                "N": {"type": "integer", "minimum": 1},
                "K": {"type": "integer", "minimum": 1},
                "L": {"type": "integer", "minimum": 1},
                "H": _matrix, "P0": _matrix, "Rnn": _matrix, "Rww": _matrix,
                "mu": _vector,
            },
        },
        "actions": {
            "type": "object",
            "required": ["items"],
            "additionalProperties": False,
            "properties": {
                "labels": {"type": "array", "items": {"type": "string"}},
                "items": {"type": "array", "minItems": 1,
                          "items": {"anyOf": [_matrix, _vector]}},
            },
        },
        "schedule": {"type": "array", "minItems": 1,
                     "items": {"type": "integer", "minimum": 0}},
        "subset": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "seed": {"type": "integer"},
        "grid_resolution": {"type": "integer", "minimum": 100},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"},
                           "format": {"enum": ["json", "csv"]}},
        },
    },
}


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    policy: str
    m: int
    model: GaussianSignalModel
    actions: FiniteActionSet = None
    schedule: tuple = None
    subset: tuple = None
    seed: int = None
    grid_resolution: int = 10**4
    output_path: str = None
    output_format: str = "json"
    raw: dict = field(default=None, repr=False)

    @property
    def config_hash(self):
        return config_hash(self.raw)


def config_hash(raw):
    """SHA-256 of the canonical JSON of a scenario, ignoring ``output``."""
    doc = {k: v for k, v in raw.items() if k != "output"}
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _shape_check(where, arr, shape):
    if arr.shape != shape:
        raise ConfigError(f"{where}: expected shape {shape}, got {arr.shape}")


def _ragged_safe(where, value):
    try:
        return np.array(value, dtype=float)
    except ValueError:
        raise ConfigError(f"{where}: rows have unequal lengths") from None


def from_dict(raw, source="<scenario>"):
    """Validate a parsed scenario document and build a :class:`ScenarioConfig`."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{source}: field {loc}: {exc.message}") from None

    md = raw["model"]
    N, K, L = md["N"], md["K"], md["L"]
    arrays = {k: _ragged_safe(f"model.{k}", md[k]) for k in ("H", "P0", "Rnn", "Rww")}
    _shape_check("model.H", arrays["H"], (K, N))
    _shape_check("model.P0", arrays["P0"], (N, N))
    _shape_check("model.Rnn", arrays["Rnn"], (K, K))
    _shape_check("model.Rww", arrays["Rww"], (L, L))
    mu = None
    if "mu" in md:
        mu = np.array(md["mu"], dtype=float)
        _shape_check("model.mu", mu, (N,))
    m = raw["m"]
    try:
        model = GaussianSignalModel(m=m, mu=mu, **arrays)
    except AdaptCompError as exc:
        raise ConfigError(f"{source}: invariant violated: {exc}") from None

    policy = raw["policy"]
    actions = None
    if "actions" in raw:
        items = raw["actions"]["items"]
        mats = [_ragged_safe(f"actions.items[{i}]", a) for i, a in enumerate(items)]
        for i, a in enumerate(mats):
            expect = (K,) if a.ndim == 1 else (L, K)
            if a.ndim == 1 and L != 1:
                raise ConfigError(f"actions.items[{i}]: vector actions need L = 1")
            _shape_check(f"actions.items[{i}]", a, expect)
        labels = raw["actions"].get("labels")
        if labels is not None and len(labels) != len(mats):
            raise ConfigError("actions.labels: one label per action is required")
        actions = FiniteActionSet(mats, labels)

    if policy in ACTION_POLICIES and actions is None:
        raise ConfigError(f"policy {policy} requires an 'actions' block")
    if policy in SCALAR_POLICIES:
        _check_scalar(model, policy)
    if policy == "oracle_grid" and (N != 2 or K != 2 or m != 2):
        raise ConfigError("policy oracle_grid requires N = K = 2, L = 1 and m = 2")

    schedule = tuple(raw["schedule"]) if "schedule" in raw else None
    if schedule is not None and actions is not None and max(schedule) >= len(actions):
        raise ConfigError("schedule: index out of range of the action set")
    subset = tuple(raw["subset"]) if "subset" in raw else None
    if subset is not None and subset and max(subset) >= N:
        raise ConfigError(f"subset: eigenvector indices must be below N = {N}")

    out = raw.get("output", {})
    return ScenarioConfig(
        name=raw.get("name", Path(str(source)).stem),
        policy=policy, m=m, model=model, actions=actions,
        schedule=schedule, subset=subset, seed=raw.get("seed"),
        grid_resolution=raw.get("grid_resolution", 10**4),
        output_path=out.get("path"), output_format=out.get("format", "json"),
        raw=raw,
    )


def _check_scalar(model, policy):
    try:
        scalar_noise_levels(model)
    except AdaptCompError as exc:
        raise ConfigError(f"policy {policy}: {exc}") from None


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(raw, source=str(path))


def save_scenario(config, path):
    Path(path).write_text(json.dumps(config.raw, indent=2, sort_keys=True) + "\n")


def bundled_scenario(name):
    """Path to a scenario shipped with the package, e.g. ``"vA"``."""
    fname = name if name.endswith(".json") else f"{name}.json"
    ref = resources.files("adaptcomp") / "scenarios" / fname
    if not ref.is_file():
        raise ConfigError(f"no bundled scenario named {name!r}")
    return Path(str(ref))


def with_policy(config, policy):
    """Re-validate ``config`` under a different policy."""
    raw = dict(config.raw, policy=policy)
    return from_dict(raw, source=config.name)
