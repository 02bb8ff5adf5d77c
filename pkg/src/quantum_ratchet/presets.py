"""Named parameter sets, one per reference figure.

Every preset is a complete configuration document (see ``config.py`` for the
schema); nothing falls back to defaults defined elsewhere.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Any

__all__ = ["Preset", "PRESETS", "get_preset", "catalog"]

# photosystem II reaction centre: E1 - E2 = 300 cm^-1, J = 75 cm^-1,
# vibron 300 sin(340 t) on level 2, gamma- = 60 cm^-1, gamma+/gamma- = 0.22
_MODEL = {
    "e1": 3.0,
    "e2": 0.0,
    "j": 0.75,
    "drive": {"a1": 0.0, "a2": 3.0, "omega": 3.40, "phi": 0.0, "feedback": False},
    "dissipation": {"gamma_minus": 0.6, "ratio": 0.22},
    "sink": {"s1": 0.0, "s2": 0.1},
}
_WINDOW_340 = 4.0 * math.pi / 3.40
_WINDOW_335 = 4.0 * math.pi / 3.35
_INTEGRATOR = {
    "method": "rk4",
    "step": None,
    "rel_tol": 1e-10,
    "abs_tol": 1e-12,
    "sample_interval": None,
    "points_per_period": 1000,
}


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    figure: str
    config: dict[str, Any]

    def resolved(self) -> dict[str, Any]:
        cfg = copy.deepcopy(self.config)
        cfg["preset"] = self.name
        return cfg


def _config(model_changes=None, t0=_WINDOW_340, simulate=None, sweep=None) -> dict[str, Any]:
    model = copy.deepcopy(_MODEL)
    for key, value in (model_changes or {}).items():
        section, _, leaf = key.rpartition(".")
        (model[section] if section else model)[leaf] = value
    return {
        "model": model,
        "objective": {"t0": t0, "r_offset": 0.5, "r_slope": 0.22},
        "integrator": dict(_INTEGRATOR),
        "simulate": simulate,
        "sweep": sweep,
    }


def _axis(parameter, start, stop, count):
    return {"parameter": parameter, "start": start, "stop": stop, "count": count}


def _sweep(axes, objective="t_bar", flatness_radius=1, profile_over=None):
    return {
        "axes": axes,
        "objective": objective,
        "flatness_radius": flatness_radius,
        "significance": 0.01,
        "profile_over": profile_over,
    }


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        Preset(
            "fig-trajectory",
            "rho11(t) for the reaction-centre model, vibron 300 sin(340 t), gamma- = 60 cm^-1",
            "trajectory figure (time evolution of rho11)",
            _config(simulate={"t_end": 3.70}),
        ),
        Preset(
            "fig4a",
            "T_bar versus vibron frequency, A = 300 cm^-1, phi = 0",
            "T_bar vs vibron frequency, strong drive panel",
            _config(
                {"drive.a2": 3.0},
                sweep=_sweep([_axis("frequency", 0.5, 5.0, 451)], flatness_radius=25),
            ),
        ),
        Preset(
            "fig4b",
            "T_bar versus vibron frequency, A = 200 cm^-1, phi = 0",
            "T_bar vs vibron frequency, weaker drive panel",
            _config(
                {"drive.a2": 2.0},
                sweep=_sweep([_axis("frequency", 0.5, 5.0, 451)], flatness_radius=25),
            ),
        ),
        Preset(
            "fig4c",
            "T_bar versus vibron amplitude on [0, 600] cm^-1, omega = 340 cm^-1",
            "T_bar vs vibron amplitude panel",
            _config(sweep=_sweep([_axis("amplitude", 0.0, 6.0, 121)], flatness_radius=5)),
        ),
        Preset(
            "fig4d",
            "T_bar versus vibron phase, A = 300 cm^-1, omega = 340 cm^-1",
            "T_bar vs vibron phase panel",
            _config(sweep=_sweep([_axis("phase", -math.pi, math.pi, 315)], flatness_radius=5)),
        ),
        Preset(
            "fig35",
            "recombination rate R versus gamma-, A = 300 cm^-1, omega = 340 cm^-1, phi = 0",
            "R(gamma-) figure",
            _config(
                sweep=_sweep([_axis("gamma_minus", 0.0, 2.0, 201)], objective="recombination_rate", flatness_radius=10)
            ),
        ),
        Preset(
            "fig3d",
            "T_bar(A, omega) landscape at gamma- = 50 cm^-1 with its minima and min-over-A profile",
            "3-D landscape figure",
            _config(
                {"dissipation.gamma_minus": 0.5},
                t0=_WINDOW_335,
                sweep=_sweep(
                    [_axis("amplitude", 0.5, 6.0, 111), _axis("frequency", 0.5, 5.0, 91)],
                    flatness_radius=[5, 5],
                    profile_over="amplitude",
                ),
            ),
        ),
    ]
}


def catalog() -> list[dict[str, str]]:
    return [{"name": p.name, "description": p.description, "figure": p.figure} for p in PRESETS.values()]


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        listing = "\n".join(f"  {p.name:15s} {p.description}" for p in PRESETS.values())
        raise KeyError(f"unknown preset {name!r}; available presets:\n{listing}") from None
