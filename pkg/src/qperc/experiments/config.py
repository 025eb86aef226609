"""Experiment configurations: defaults, JSON files and ``key=value`` overrides."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError

POOL = {"pool_size": 4000, "sweeps": 60, "replicas": 1, "window": 20, "extinct_cap": 10**6}

DEFAULTS: dict[str, dict] = {
    "rate": {
        "graph": "random_regular:2000:3",
        "p": 1.0,
        "h": 4,
        "n_seeds": 20,
        "re_grid": [-3.0, -1.5, 0.0, 1.5, 3.0],
        "im_factors": [1.0, 2.0],
        "pool": dict(POOL),
        "budget_seconds": 300,
    },
    "moments": {
        "n_pairs": 20,
        "h": 3,
        "b": 4.0,
        "completion_depth": 6,
        "offspring": {"kind": "explicit", "pmf": {"1": 1 / 3, "2": 1 / 3, "3": 1 / 3}},
        "re_grid": [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0],
        "im_factors": [1.0, 2.0, 4.0],
        "below_threshold_factor": 0.1,
        "budget_seconds": 60,
    },
    "locallaw": {
        "graph": "random_regular:2000:3",
        "p_values": [0.8, 0.9, 0.95, 1.0],
        "h": 4,
        "eta_ladder": [0.1, 0.01, 0.001, 0.0001],
        "atom_probe_k": 5,
        "atom_probe_eta": 1e-6,
        "levels": [0.005, 1.0],
        "lambda_points": 81,
        "lambda_max": 3.2,
        "scale_c1": 0.25,
        "n_scales": 4,
        "epsilon": 0.0,
        "ratio_factor": 3.0,
        "pool": dict(POOL),
        "budget_seconds": 300,
    },
    "deloc": {
        "graph": "random_regular:2000:3",
        "p_values": [0.3, 0.95, 1.0],
        "h": 4,
        "n_seeds": 5,
        "c1_values": [0.5, 1.0, 2.0, 4.0],
        "rho_values": [0.25, 0.5, 0.75, 0.9],
        "budget_seconds": 300,
    },
    "concentration": {
        "graph": "random_regular:1000:3",
        "p": 0.5,
        "n_seeds": 200,
        "t_values": [0.0, 0.05, 0.1, 0.2],
        "test_function": "halfline",
        "threshold": 0.0,
        "zero_tol": 1e-9,
        "sigmoid_width": 0.25,
        "local_functional": "tree_ball",
        "h": 2,
        "volume_cap": 50,
        "stabloc_t_values": [0.0, 0.05, 0.1, 0.2, 0.5],
        "budget_seconds": 180,
    },
    "gw-ac": {
        "eta": 1e-3,
        "lambda_points": 81,
        "gw": {"q": 3, "defect": 0, "eps_values": [0.2, 0.1, 0.05, 0.02]},
        "ugw": {"q": 2, "p_values": [0.9, 0.95, 0.99, 1.0]},
        "dirac_q": [2],
        "pool": {"pool_size": 2000, "sweeps": 100, "replicas": 1, "window": 20,
                 "extinct_cap": 10**6},
        "budget_seconds": 300,
    },
    "dos": {
        "kind": "ugw",
        "offspring": {"kind": "binomial", "n": 3, "p": 0.85},
        "lambda_min": -4.0,
        "lambda_max": 4.0,
        "lambda_points": 101,
        "eta": 0.1,
        "pool": dict(POOL),
        "budget_seconds": 120,
    },
    "trees": {
        "k": 8,
        "export_edge_lists": True,
        "budget_seconds": 30,
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully materialized configuration: defaults merged with file and overrides."""

    experiment: str
    params: dict
    seed: int
    out: str | None = None

    def __getitem__(self, key):
        return self.params[key]

    def get(self, key, default=None):
        return self.params.get(key, default)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "seed": self.seed, "params": self.params}

    def with_params(self, changes: dict | None = None, **kw) -> "ExperimentConfig":
        """Copy with parameters replaced; dotted keys reach nested entries."""
        params = copy.deepcopy(self.params)
        for k, v in {**(changes or {}), **kw}.items():
            _set_dotted(params, k, v)
        return ExperimentConfig(self.experiment, params, self.seed, self.out)


def _merge(base: dict, extra: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        where = f"{path}{k}"
        if k not in out:
            raise ConfigError(f"unknown configuration key {where!r}")
        if isinstance(out[k], dict) and isinstance(v, dict) and k not in ("offspring",):
            out[k] = _merge(out[k], v, where + ".")
        else:
            out[k] = v
    return out


def _set_dotted(params: dict, key: str, value) -> None:
    parts = key.split(".")
    node = params
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise ConfigError(f"unknown configuration key {key!r}")
        node = node[p]
    if parts[-1] not in node and parts[-2:-1] != ["pmf"]:
        raise ConfigError(f"unknown configuration key {key!r}")
    node[parts[-1]] = value


def parse_override(text: str):
    """``key=value``; the value is parsed as JSON when possible, else kept as a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError("empty override key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def load_config(experiment: str, path=None, overrides=(), seed: int | None = None,
                out=None) -> ExperimentConfig:
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    params = copy.deepcopy(DEFAULTS[experiment])
    file_seed = None
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data = dict(data)
        name = data.pop("experiment", experiment)
        if name != experiment:
            raise ConfigError(f"config is for {name!r}, not {experiment!r}")
        file_seed = data.pop("seed", None)
        params = _merge(params, data.pop("params", data))
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        if key == "seed":
            file_seed = value
            continue
        _set_dotted(params, key, value)
    final_seed = seed if seed is not None else (file_seed if file_seed is not None else 0)
    if not isinstance(final_seed, int) or not 0 <= final_seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return ExperimentConfig(experiment, params, int(final_seed), None if out is None else str(out))
