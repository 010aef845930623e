"""JSON run configuration for ``kernmobo bo-run``.

Example::

    {
      "notes": "two similarity objectives on a synthetic pool",
      "seed": 0,
      "method": "gp-mobo",
      "n_iter": 20,
      "n_known": 10,
      "dataset": {"synthetic": {"n": 500, "seed": 0}},
      "oracle": {"similarity": {"references": ["CCO", "c1ccccc1"], "kind": "minmax"}},
      "output_dir": "runs/demo"
    }

Relative paths are resolved against the directory holding the config file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from kernmobo.acquisition import AcquisitionConfig, AcquisitionKind
from kernmobo.bo import METHODS, BORunConfig
from kernmobo.exceptions import ConfigError
from kernmobo.fingerprint import FingerprintConfig
from kernmobo.gp import GPHyperparams
from kernmobo.kernels import KernelKind
from kernmobo.pareto import ReferencePointConfig

SEED_ENV = "KERNMOBO_SEED"

_HYPER = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "mean": {"type": "number"},
        "amplitude": {"type": "number", "exclusiveMinimum": 0},
        "noise": {"type": "number", "minimum": 0},
    },
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dataset", "oracle"],
    "properties": {
        "notes": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "method": {"enum": list(METHODS)},
        "n_iter": {"type": "integer", "minimum": 0},
        "n_known": {"type": "integer", "minimum": 1},
        "known_selection": {"enum": ["first", "random"]},
        "kernel": {"enum": [k.value for k in KernelKind]},
        "fingerprint": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "radius": {"type": "integer", "minimum": 0},
                "fold_dim": {"type": "integer", "minimum": 0},
            },
        },
        "hypers": {"oneOf": [_HYPER, {"type": "array", "items": _HYPER, "minItems": 1}]},
        "acquisition": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": [k.value for k in AcquisitionKind]},
                "mc_samples": {"type": "integer", "minimum": 1},
                "ucb_beta": {"type": "number", "minimum": 0},
            },
        },
        "reference": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "floor": {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "number"}, "minItems": 1}]},
                "scale": {"type": "number", "minimum": 0},
                "eps": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "smiles_file": {"type": "string"},
                "synthetic": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["n"],
                    "properties": {
                        "n": {"type": "integer", "minimum": 2},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "csv": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["path", "columns"],
                    "properties": {
                        "path": {"type": "string"},
                        "columns": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    },
                },
                "similarity": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["references"],
                    "properties": {
                        "references": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                        "kind": {"enum": [k.value for k in KernelKind]},
                    },
                },
            },
        },
        "output_dir": {"type": "string"},
    },
}


@dataclass
class RunConfigFile:
    dataset: dict
    oracle: dict
    notes: str = ""
    seed: int = 0
    method: str = "gp-mobo"
    n_iter: int = 20
    n_known: int = 10
    known_selection: str = "random"
    kernel: str = "minmax"
    fingerprint: dict = field(default_factory=lambda: {"radius": 2, "fold_dim": 0})
    hypers: Any = field(default_factory=lambda: {"mean": 0.0, "amplitude": 1.0, "noise": 1e-4})
    acquisition: dict = field(default_factory=lambda: {"kind": "ehvi", "mc_samples": 1000, "ucb_beta": 1.0})
    reference: dict = field(default_factory=lambda: {"floor": None, "scale": 0.1, "eps": 1e-6})
    output_dir: str = "results"
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "RunConfigFile":
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid config at {where}: {exc.message}") from None
        cfg = cls(dataset=dict(data["dataset"]), oracle=dict(data["oracle"]), base_dir=Path(base_dir))
        for key in ("notes", "seed", "method", "n_iter", "n_known", "known_selection",
                    "kernel", "output_dir"):
            if key in data:
                setattr(cfg, key, data[key])
        # nested sections merge over the defaults
        for key in ("fingerprint", "acquisition", "reference"):
            if key in data:
                setattr(cfg, key, {**getattr(cfg, key), **data[key]})
        if "hypers" in data:
            h = data["hypers"]
            default = {"mean": 0.0, "amplitude": 1.0, "noise": 1e-4}
            cfg.hypers = [{**default, **x} for x in h] if isinstance(h, list) else {**default, **h}
        cfg.bo_config()  # surface value errors now, before any computation
        return cfg

    def to_dict(self) -> dict:
        return {
            "notes": self.notes,
            "seed": self.seed,
            "method": self.method,
            "n_iter": self.n_iter,
            "n_known": self.n_known,
            "known_selection": self.known_selection,
            "kernel": self.kernel,
            "fingerprint": dict(self.fingerprint),
            "hypers": [dict(h) for h in self.hypers] if isinstance(self.hypers, list) else dict(self.hypers),
            "acquisition": dict(self.acquisition),
            "reference": dict(self.reference),
            "dataset": json.loads(json.dumps(self.dataset)),
            "oracle": json.loads(json.dumps(self.oracle)),
            "output_dir": self.output_dir,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def bo_config(self, seed: int | None = None) -> BORunConfig:
        try:
            if isinstance(self.hypers, list):
                hypers = tuple(GPHyperparams(**h) for h in self.hypers)
            else:
                hypers = GPHyperparams(**self.hypers)
            return BORunConfig(
                n_iter=self.n_iter,
                hypers=hypers,
                acquisition=AcquisitionConfig(**self.acquisition),
                reference=ReferencePointConfig(**self.reference),
                fingerprint=FingerprintConfig(**self.fingerprint),
                kernel=KernelKind(self.kernel),
                seed=self.seed if seed is None else seed,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config value: {exc}") from None


def load_config(path) -> RunConfigFile:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return RunConfigFile.from_dict(data, base_dir=path.parent)


def resolve_seed(cli_seed: int | None, config: RunConfigFile) -> int:
    """CLI flag beats the ``KERNMOBO_SEED`` environment variable, which beats the config."""
    if cli_seed is not None:
        return int(cli_seed)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
    return int(config.seed)
