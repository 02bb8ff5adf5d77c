"""Run configuration: a JSON document resolved from preset, file and overrides.

Schema (all energies and times in internal units)::

    {
      "preset": "fig4a",                    # echo only
      "model": {"e1", "e2", "j",
                "drive": {"a1", "a2", "omega", "phi", "feedback"},
                "dissipation": {"gamma_minus", "ratio" | "beta_inverse"},
                "sink": {"s1", "s2"}},
      "objective": {"t0", "r_offset", "r_slope"},
      "integrator": {"method", "step", "rel_tol", "abs_tol",
                     "sample_interval", "points_per_period"},
      "simulate": {"t_end"} | null,
      "sweep": {"axes": [{"parameter", "start", "stop", "count"}, ...],
                "objective", "flatness_radius", "significance",
                "profile_over"} | null
    }

Precedence: ``--set`` overrides > config file > preset.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass
from typing import Any, Iterable

from .core import ModelSpec
from .dynamics import thermal_ratio
from .integrate import IntegratorConfig
from .objective import ObjectiveSpec
from .presets import get_preset
from .sweep import SweepAxis, SweepSpec

__all__ = ["ConfigError", "RunConfig", "load_config_file", "resolve_config", "apply_override", "build"]

TOP_LEVEL = ("preset", "model", "objective", "integrator", "simulate", "sweep")
_MODEL_KEYS = ("e1", "e2", "j", "drive", "dissipation", "sink")
_LEAF_ALIASES = {
    "drive": {"amplitude": "a2", "frequency": "omega", "phase": "phi"},
}


class ConfigError(ValueError):
    pass


def load_config_file(path: str | os.PathLike) -> dict[str, Any]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc


def _merge(base: dict[str, Any], override: dict[str, Any], path: str = "") -> dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key != "axes":
            out[key] = _merge(out[key], value, where + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict[str, Any], assignment: str) -> dict[str, Any]:
    """Apply one ``key.path=value`` override.

    Paths may omit the leading ``model.``; ``drive.amplitude``,
    ``drive.frequency`` and ``drive.phase`` name ``a2``, ``omega`` and ``phi``.
    Values are parsed as JSON where possible.
    """
    key, sep, raw = assignment.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    parts = key.strip().split(".")
    if parts[0] in _MODEL_KEYS:
        parts = ["model", *parts]
    if parts[0] not in TOP_LEVEL:
        raise ConfigError(f"--set {key}: unknown section {parts[0]!r}; expected one of {TOP_LEVEL}")
    if len(parts) >= 3 and parts[-2] in _LEAF_ALIASES:
        parts[-1] = _LEAF_ALIASES[parts[-2]].get(parts[-1], parts[-1])
    out = copy.deepcopy(cfg)
    node = out
    for i, p in enumerate(parts[:-1]):
        nxt = node.get(p)
        if nxt is None:
            nxt = node[p] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(f"--set {key}: {'.'.join(parts[: i + 1])} is not a section")
        node = nxt
    node[parts[-1]] = _parse_value(raw)
    return out


def resolve_config(
    preset: str | None = None,
    config_file: str | os.PathLike | None = None,
    overrides: Iterable[str] = (),
    feedback: bool = False,
) -> dict[str, Any]:
    """Merge preset, file and overrides into one fully resolved document."""
    cfg: dict[str, Any] = {}
    if config_file is not None:
        file_cfg = load_config_file(config_file)
        preset = preset or file_cfg.get("preset")
    else:
        file_cfg = {}
    if preset is not None:
        try:
            cfg = get_preset(preset).resolved()
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    cfg = _merge(cfg, file_cfg)
    if preset is not None:
        cfg["preset"] = preset
    for assignment in overrides:
        cfg = apply_override(cfg, assignment)
    if feedback:
        cfg = apply_override(cfg, "model.drive.feedback=true")
        cfg = apply_override(cfg, "model.drive.phi=0.0")
    unknown = sorted(set(cfg) - set(TOP_LEVEL))
    if unknown:
        raise ConfigError(f"unknown top-level field(s): {unknown}; expected {TOP_LEVEL}")
    for section in ("model", "objective"):
        if not isinstance(cfg.get(section), dict):
            raise ConfigError(f"missing section {section!r} (give --preset or a full inline config)")
    cfg.setdefault("integrator", {})
    cfg.setdefault("simulate", None)
    cfg.setdefault("sweep", None)
    cfg.setdefault("preset", None)
    # a temperature supersedes any ratio; the echo keeps only the ratio it implies
    diss = cfg["model"].get("dissipation", {})
    if isinstance(diss, dict) and "beta_inverse" in diss:
        try:
            e1, e2 = float(cfg["model"]["e1"]), float(cfg["model"]["e2"])
            diss["ratio"] = thermal_ratio(float(diss.pop("beta_inverse")), e1 - e2)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"model.dissipation.beta_inverse: {exc}") from None
    return cfg


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    objective: ObjectiveSpec
    integrator: IntegratorConfig
    t_end: float | None
    sweep: SweepSpec | None
    flatness_radius: Any = 1
    significance: float = 0.01
    profile_over: str | None = None


def _section(cfg: dict[str, Any], name: str, build_fn):
    try:
        return build_fn(cfg[name])
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def build(cfg: dict[str, Any]) -> RunConfig:
    """Turn a resolved document into typed objects; errors name the field."""
    model = _section(cfg, "model", ModelSpec.from_dict)
    objective = _section(cfg, "objective", lambda d: ObjectiveSpec(**d))
    integrator = _section(cfg, "integrator", lambda d: IntegratorConfig(**(d or {})))
    t_end = None
    if cfg.get("simulate"):
        t_end = _section(cfg, "simulate", lambda d: float(d["t_end"]))
        if not t_end > 0:
            raise ConfigError("simulate.t_end must be > 0")
    sweep = None
    extras: dict[str, Any] = {}
    if cfg.get("sweep"):
        s = cfg["sweep"]

        def make(s):
            axes = s["axes"]
            if not isinstance(axes, list):
                raise ConfigError("sweep.axes must be a list")
            return SweepSpec(
                axes=tuple(SweepAxis(**a) for a in axes),
                base=model,
                window=objective,
                objective=s.get("objective", "t_bar"),
                integrator=integrator,
            )

        sweep = _section(cfg, "sweep", make)
        extras = {
            "flatness_radius": s.get("flatness_radius", 1),
            "significance": float(s.get("significance", 0.01)),
            "profile_over": s.get("profile_over"),
        }
        if extras["profile_over"] is not None and extras["profile_over"] not in sweep.parameters:
            raise ConfigError(f"sweep.profile_over: {extras['profile_over']!r} is not a sweep axis")
    return RunConfig(model, objective, integrator, t_end, sweep, **extras)
