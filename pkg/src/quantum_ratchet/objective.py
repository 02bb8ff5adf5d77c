"""Recombination objectives: residence time in level 1 and the rate figure of merit."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Sequence

import numpy as np

from .core import ModelSpec, basis_state
from .integrate import IntegratorConfig, propagate

__all__ = [
    "ObjectiveSpec",
    "default_window",
    "t_bar",
    "recombination_rate",
    "flatness",
]


@dataclass(frozen=True)
class ObjectiveSpec:
    """Integration window and the constants of the recombination rate.

    ``r_offset`` (internal energy, 0.5 = 50 cm^-1) and ``r_slope`` enter
    ``R = (r_offset + r_slope * gamma_minus) * T_bar``.
    """

    t0: float
    r_offset: float = 0.5
    r_slope: float = 0.22

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t0) and self.t0 > 0):
            raise ValueError(f"t0 must be finite and > 0, got {self.t0}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def default_window(beat_angular_frequency: float) -> float:
    """Two beat periods, 2 * 2 pi / frequency."""
    if not beat_angular_frequency > 0:
        raise ValueError(f"frequency must be > 0, got {beat_angular_frequency}")
    return 2.0 * (2.0 * math.pi / beat_angular_frequency)


def t_bar(model: ModelSpec, spec: ObjectiveSpec, cfg: IntegratorConfig | None = None) -> float:
    """Time-integrated population of level 1 over ``[0, t0]``, starting in |1><1|."""
    traj = propagate(model, basis_state(1), spec.t0, cfg)
    return float(traj.rho11_integral[-1])


def recombination_rate(gamma_minus: float, t_bar: float, spec: ObjectiveSpec) -> float:
    """Dimensionless ``(r_offset + r_slope * gamma_minus) * t_bar`` (hbar = 1)."""
    return (spec.r_offset + spec.r_slope * gamma_minus) * t_bar


def flatness(surface, at: Sequence[int], radius: int | Sequence[int]) -> float:
    """Relative spread of the objective around a grid point.

    ``(max - min) / value(at)`` over the box of half-width ``radius`` grid steps
    (one integer, or one per axis) centred on index ``at``. Small values mean
    a flat basin.

    Raises
    ------
    ValueError
        If the neighbourhood leaves the grid.
    """
    values = np.asarray(surface.values)
    at = tuple(int(i) for i in np.atleast_1d(at))
    if len(at) != values.ndim:
        raise ValueError(f"index {at} does not match a {values.ndim}-D surface")
    radii = [int(radius)] * values.ndim if np.ndim(radius) == 0 else [int(r) for r in radius]
    if len(radii) != values.ndim or min(radii) < 1:
        raise ValueError(f"radius must be >= 1 per axis, got {radius}")
    box = []
    for i, r, n in zip(at, radii, values.shape):
        if i - r < 0 or i + r > n - 1:
            raise ValueError(f"neighbourhood of radius {r} around index {i} leaves the grid (size {n})")
        box.append(slice(i - r, i + r + 1))
    patch = values[tuple(box)]
    return float((patch.max() - patch.min()) / values[at])
