"""Run configuration: YAML parsing with strict key validation.

A config file has a ``problem`` block, optional ``optimizer`` and ``output``
blocks, and a ``seed``.  Unknown keys anywhere are rejected with the
offending key path in the error message.  The fully resolved configuration
(defaults filled in) round-trips into report files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .grid import DiffusionTensor, SpaceGrid, TimeGrid, isotropic
from .nonlinearity import KINDS, NonlinearitySpec, TruncationSpec
from .optimizer import OptimizerConfig
from .presets import spatial_preset, target_preset
from .problem import ProblemSpec


class ConfigError(ValueError):
    """Malformed run configuration."""


_PROBLEM_KEYS = {"n_dim", "n_per_axis", "n_t", "T", "kappa", "gamma",
                 "diffusion", "nonlinearity", "truncation", "y0", "yd"}
_NONLINEARITY_KEYS = {"kind", "params"}
_OPTIMIZER_KEYS = {"tol", "max_iter", "armijo_c", "backtrack", "initial_step",
                   "max_backtracks"}
_OUTPUT_KEYS = {"directory", "dump_fields"}
_TOP_KEYS = {"problem", "optimizer", "output", "seed"}

_PROBLEM_DEFAULTS = {
    "n_dim": 1, "n_per_axis": 16, "n_t": 16, "T": 1.0,
    "kappa": 0.1, "gamma": 1.0,
    "diffusion": 1.0,
    "nonlinearity": {"kind": "zero", "params": []},
    "truncation": "auto",
    "y0": "zero", "yd": "zero",
}
_OPTIMIZER_DEFAULTS = {
    "tol": 1e-8, "max_iter": 2000, "armijo_c": 1e-4, "backtrack": 0.5,
    "initial_step": None, "max_backtracks": 60,
}
_OUTPUT_DEFAULTS = {"directory": ".", "dump_fields": False}


def _reject_unknown(block: dict, allowed: set, path: str):
    if not isinstance(block, dict):
        raise ConfigError(f"section {path!r} must be a mapping")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key}" if path else
                              f"unknown key {key}")


def _merged(block, defaults, allowed, path):
    block = {} if block is None else block
    _reject_unknown(block, allowed, path)
    out = dict(defaults)
    out.update(block)
    return out


@dataclass
class RunConfig:
    problem: dict
    optimizer: dict
    output: dict
    seed: int

    def to_dict(self) -> dict:
        """Fully resolved configuration, JSON-serializable."""
        return {
            "problem": dict(self.problem),
            "optimizer": dict(self.optimizer),
            "output": dict(self.output),
            "seed": self.seed,
        }

    def problem_spec(self) -> ProblemSpec:
        return build_problem_spec(self.problem)

    def optimizer_config(self, **overrides) -> OptimizerConfig:
        kwargs = dict(self.optimizer)
        kwargs.update(overrides)
        return OptimizerConfig(**kwargs)


def _coerce_diffusion(entry, n_dim: int) -> DiffusionTensor:
    if isinstance(entry, (int, float)):
        return isotropic(n_dim, float(entry))
    matrix = np.asarray(entry, dtype=float)
    if matrix.shape != (n_dim, n_dim):
        raise ConfigError(f"problem.diffusion must be a scalar or an "
                          f"{n_dim}x{n_dim} matrix")
    return DiffusionTensor(tuple(tuple(row) for row in matrix))


def _coerce_nonlinearity(entry, truncation) -> NonlinearitySpec:
    if isinstance(entry, str):
        entry = {"kind": entry, "params": []}
    entry = _merged(entry, {"kind": "zero", "params": []},
                    _NONLINEARITY_KEYS, "problem.nonlinearity")
    if entry["kind"] not in KINDS:
        raise ConfigError(f"problem.nonlinearity.kind must be one of {KINDS}")
    trunc = None
    if truncation not in ("auto", None):
        try:
            trunc = TruncationSpec(float(truncation))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"problem.truncation must be 'auto' or a "
                              f"positive number: {exc}") from exc
    try:
        return NonlinearitySpec(entry["kind"], tuple(entry["params"] or ()),
                                trunc)
    except ValueError as exc:
        raise ConfigError(f"problem.nonlinearity: {exc}") from exc


def build_problem_spec(problem: dict) -> ProblemSpec:
    try:
        grid = SpaceGrid(int(problem["n_dim"]), int(problem["n_per_axis"]))
        tgrid = TimeGrid(float(problem["T"]), int(problem["n_t"]))
        diffusion = _coerce_diffusion(problem["diffusion"], grid.n_dim)
        nonlinearity = _coerce_nonlinearity(problem["nonlinearity"],
                                            problem["truncation"])
        y0 = spatial_preset(problem["y0"], grid)
        yd = target_preset(problem["yd"], grid, tgrid)
        return ProblemSpec(
            kappa=float(problem["kappa"]), gamma=float(problem["gamma"]),
            grid=grid, tgrid=tgrid, diffusion=diffusion,
            nonlinearity=nonlinearity, y0=y0, yd=yd)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"problem block: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    _reject_unknown(raw, _TOP_KEYS, "")
    problem = _merged(raw.get("problem"), _PROBLEM_DEFAULTS, _PROBLEM_KEYS,
                      "problem")
    optimizer = _merged(raw.get("optimizer"), _OPTIMIZER_DEFAULTS,
                        _OPTIMIZER_KEYS, "optimizer")
    output = _merged(raw.get("output"), _OUTPUT_DEFAULTS, _OUTPUT_KEYS,
                     "output")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    cfg = RunConfig(problem, optimizer, output, seed)
    # fail fast on domain errors so the CLI can exit with a config error
    cfg.problem_spec()
    try:
        cfg.optimizer_config()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"optimizer block: {exc}") from exc
    if not isinstance(cfg.output["dump_fields"], bool):
        raise ConfigError("output.dump_fields must be a boolean")
    return cfg


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())
