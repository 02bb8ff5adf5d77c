"""Objective landscapes over vibron and dissipation parameters.

A sweep evaluates the objective on a 1-D or 2-D grid; post-processing finds
grid-local minima, minimal profiles along one axis, and the minimax barrier
separating two minima.
"""

from __future__ import annotations

import csv
import heapq
import itertools
import json
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Sequence

import numpy as np
from scipy.signal import peak_prominences

from . import __version__
from .core import UNITS, ModelSpec
from .integrate import IntegrationError, IntegratorConfig
from .objective import ObjectiveSpec, flatness, recombination_rate, t_bar

__all__ = [
    "PARAMETERS",
    "SweepAxis",
    "SweepSpec",
    "SweepSurface",
    "SweepError",
    "Minimum",
    "MinProfile",
    "apply_parameter",
    "evaluate",
    "run_sweep",
    "find_minima",
    "min_over_axis",
    "barrier_check",
    "load_surface",
]

# parameter id -> unit suffix used in exports
PARAMETERS = {
    "amplitude": "energy",
    "frequency": "energy",
    "phase": "rad",
    "gamma_minus": "energy",
}
OBJECTIVES = ("t_bar", "recombination_rate")

# ties closer than this count as equal when detecting minima
TIE_TOL = 1e-12


class SweepError(RuntimeError):
    def __init__(self, message: str, coordinates: dict[str, float]):
        super().__init__(f"{message} at {coordinates}")
        self.coordinates = coordinates


def apply_parameter(model: ModelSpec, name: str, value: float) -> ModelSpec:
    if name == "amplitude":
        return model.with_drive(a2=value)
    if name == "frequency":
        return model.with_drive(omega=value)
    if name == "phase":
        return model.with_drive(phi=value)
    if name == "gamma_minus":
        return model.with_dissipation(gamma_minus=value)
    raise ValueError(f"unknown sweep parameter {name!r}; use one of {sorted(PARAMETERS)}")


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    start: float
    stop: float
    count: int

    def __post_init__(self) -> None:
        if self.parameter not in PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}; use one of {sorted(PARAMETERS)}")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis {self.parameter}: count must be an integer >= 2, got {self.count}")
        if not self.start < self.stop:
            raise ValueError(f"axis {self.parameter}: start must be < stop")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.count))

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.count - 1)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[SweepAxis, ...]
    base: ModelSpec
    window: ObjectiveSpec
    objective: str = "t_bar"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(self.axes))
        if not 1 <= len(self.axes) <= 2:
            raise ValueError(f"a sweep has 1 or 2 axes, got {len(self.axes)}")
        names = [a.parameter for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"sweep axes must be distinct, got {names}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}; use one of {OBJECTIVES}")
        if "phase" in names and self.base.drive.feedback:
            raise ValueError("the feedback drive has no phase to sweep")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(a.count) for a in self.axes)

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(a.parameter for a in self.axes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "axes": [asdict(a) for a in self.axes],
            "objective": self.objective,
            "base": self.base.to_dict(),
            "window": self.window.to_dict(),
            "integrator": self.integrator.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SweepSpec:
        return cls(
            axes=tuple(SweepAxis(**a) for a in d["axes"]),
            base=ModelSpec.from_dict(d["base"]),
            window=ObjectiveSpec(**d["window"]),
            objective=d.get("objective", "t_bar"),
            integrator=IntegratorConfig(**d.get("integrator", {})),
        )


def evaluate(model: ModelSpec, window: ObjectiveSpec, objective: str, cfg: IntegratorConfig) -> float:
    tb = t_bar(model, window, cfg)
    if objective == "t_bar":
        return tb
    return recombination_rate(model.dissipation.gamma_minus, tb, window)


@dataclass
class SweepSurface:
    spec: SweepSpec
    grid: tuple[np.ndarray, ...]
    values: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def parameters(self) -> tuple[str, ...]:
        return self.spec.parameters

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def axis_index(self, parameter: str) -> int:
        try:
            return self.parameters.index(parameter)
        except ValueError:
            raise ValueError(f"parameter {parameter!r} is not an axis of this surface {self.parameters}") from None

    def location(self, index: Sequence[int]) -> dict[str, float]:
        return {p: float(g[i]) for p, g, i in zip(self.parameters, self.grid, index)}

    # -- exports ---------------------------------------------------------

    def csv_header(self) -> list[str]:
        cols = []
        for p in self.parameters:
            if PARAMETERS[p] == "rad":
                cols.append(f"{p}_rad")
            else:
                cols += [f"{p}_internal", f"{p}_cm1"]
        if self.spec.objective == "t_bar":
            cols += ["t_bar_internal", "t_bar_fs"]
        else:
            cols.append("recombination_rate")
        return cols

    def write_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.csv_header())
            for index in np.ndindex(self.values.shape):
                row = []
                for p, g, i in zip(self.parameters, self.grid, index):
                    x = float(g[i])
                    row += [x] if PARAMETERS[p] == "rad" else [x, x * UNITS.energy_unit_cm]
                v = float(self.values[index])
                row += [v, v * UNITS.time_unit_fs] if self.spec.objective == "t_bar" else [v]
                w.writerow([repr(x) for x in row])

    def to_json_dict(self, minima: Sequence[Minimum] | None = None, **extra: Any) -> dict[str, Any]:
        doc = {
            "spec": self.spec.to_dict(),
            "metadata": self.metadata,
            "grid": {p: g.tolist() for p, g in zip(self.parameters, self.grid)},
            "values": self.values.tolist(),
        }
        if minima is not None:
            doc["minima"] = [m.to_dict() for m in minima]
        doc.update(extra)
        return doc

    def write_json(self, path: str | os.PathLike, minima: Sequence[Minimum] | None = None, **extra: Any) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(minima, **extra), fh, indent=2)
            fh.write("\n")


def load_surface(path: str | os.PathLike) -> SweepSurface:
    with open(path) as fh:
        doc = json.load(fh)
    spec = SweepSpec.from_dict(doc["spec"])
    grid = tuple(np.asarray(doc["grid"][p], dtype=float) for p in spec.parameters)
    return SweepSurface(spec, grid, np.asarray(doc["values"], dtype=float), doc.get("metadata", {}))


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepSurface:
    """Evaluate the objective at every grid point.

    Results land in slots addressed by grid index, so the surface does not
    depend on ``workers`` or completion order.

    Raises
    ------
    SweepError
        If any grid point fails to propagate; carries the coordinates.
    """
    grid = tuple(a.values for a in spec.axes)
    indices = list(np.ndindex(spec.shape))
    values = np.empty(spec.shape)

    def work(chunk):
        out = []
        for index in chunk:
            model = spec.base
            for p, g, i in zip(spec.parameters, grid, index):
                model = apply_parameter(model, p, float(g[i]))
            try:
                out.append(evaluate(model, spec.window, spec.objective, spec.integrator))
            except IntegrationError as exc:
                coords = {p: float(g[i]) for p, g, i in zip(spec.parameters, grid, index)}
                raise SweepError(f"propagation failed: {exc}", coords) from exc
        return out

    workers = max(1, int(workers))
    n_chunks = max(1, min(len(indices), 4 * workers))
    chunks = [indices[k::n_chunks] for k in range(n_chunks)]
    if workers == 1:
        pairs = [(c, work(c)) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(zip(chunks, pool.map(work, chunks)))
    for chunk, result in pairs:
        for index, v in zip(chunk, result):
            values[index] = v
    if not np.all(np.isfinite(values)):
        bad = np.unravel_index(int(np.argmax(~np.isfinite(values))), values.shape)
        raise SweepError("objective is not finite", {p: float(g[i]) for p, g, i in zip(spec.parameters, grid, bad)})

    metadata = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "engine_version": __version__,
        "python": platform.python_version(),
        "integrator": spec.integrator.to_dict(),
        "workers": workers,
    }
    return SweepSurface(spec, grid, values, metadata)


# -- post-processing ---------------------------------------------------------


@dataclass
class Minimum:
    """A grid minimum.

    ``kind`` is ``"global"`` for the interior minimum holding the least grid
    value, ``"local"`` for other interior minima, and ``"boundary"`` when the
    least value sits on the grid edge. ``depth`` (1-D only) is the prominence
    below the lower flanking maximum; ``significant`` compares it with
    ``significance * scale``.
    """

    index: tuple[int, ...]
    location: dict[str, float]
    value: float
    kind: str
    basin_flatness: float | None = None
    depth: float | None = None
    significant: bool | None = None

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["index"] = list(self.index)
        return d


def _neighbours(index: tuple[int, ...], shape: tuple[int, ...]):
    for offset in itertools.product((-1, 0, 1), repeat=len(shape)):
        if not any(offset):
            continue
        nb = tuple(i + o for i, o in zip(index, offset))
        if all(0 <= k < n for k, n in zip(nb, shape)):
            yield nb


def _on_boundary(index: tuple[int, ...], shape: tuple[int, ...]) -> bool:
    return any(i == 0 or i == n - 1 for i, n in zip(index, shape))


def _interior_minima(values: np.ndarray) -> list[tuple[int, ...]]:
    shape = values.shape
    seen: set[tuple[int, ...]] = set()
    found = []
    for index in np.ndindex(shape):
        if index in seen:
            continue
        v = values[index]
        if any(values[nb] < v - TIE_TOL for nb in _neighbours(index, shape)):
            continue
        # flood the plateau of tied values; it is a minimum if every rim point is higher
        plateau, stack, is_min = {index}, [index], True
        while stack:
            cur = stack.pop()
            for nb in _neighbours(cur, shape):
                if nb in plateau:
                    continue
                if abs(values[nb] - v) <= TIE_TOL:
                    plateau.add(nb)
                    stack.append(nb)
                elif values[nb] < v:
                    is_min = False
        seen |= plateau
        if is_min and not any(_on_boundary(p, shape) for p in plateau):
            found.append(min(plateau))
    return sorted(found)


def _significance_scale(surface: SweepSurface) -> float:
    w = surface.spec.window
    if surface.spec.objective == "t_bar":
        return w.t0
    # R of a system that never leaves level 1 at zero dephasing
    return w.r_offset * w.t0


def find_minima(
    surface: SweepSurface,
    flatness_radius: int | Sequence[int] | None = 1,
    significance: float = 0.01,
) -> list[Minimum]:
    """Grid-local minima, the global minimum, and a boundary flag.

    A point (or tied plateau, reported at its lexicographically smallest
    index) is a local minimum when it lies below all axis and diagonal
    neighbours. Boundary points never qualify; if the least grid value sits on
    the boundary a ``"boundary"`` entry is appended.
    """
    values = np.asarray(surface.values)
    shape = values.shape
    flat_index = int(np.argmin(values))
    g_index = tuple(int(i) for i in np.unravel_index(flat_index, shape))
    g_value = values[g_index]
    interior = _interior_minima(values)

    depths: dict[tuple[int, ...], float] = {}
    if values.ndim == 1 and interior:
        peaks = np.array([i[0] for i in interior])
        prom = peak_prominences(-values, peaks)[0]
        depths = {i: float(p) for i, p in zip(interior, prom)}
    threshold = significance * _significance_scale(surface)

    def basin(index):
        if flatness_radius is None:
            return None
        try:
            return flatness(surface, index, flatness_radius)
        except ValueError:
            return None

    minima = []
    for index in interior:
        is_global = values[index] <= g_value + TIE_TOL
        depth = depths.get(index)
        minima.append(
            Minimum(
                index=index,
                location=surface.location(index),
                value=float(values[index]),
                kind="global" if is_global else "local",
                basin_flatness=basin(index),
                depth=depth,
                significant=None if depth is None else bool(depth > threshold),
            )
        )
    if not any(m.kind == "global" for m in minima):
        minima.append(
            Minimum(index=g_index, location=surface.location(g_index), value=float(g_value), kind="boundary")
        )
    return minima


@dataclass
class MinProfile:
    """Minimum of a 2-D surface over ``reduced`` for each value of ``parameter``."""

    parameter: str
    reduced: str
    grid: np.ndarray
    values: np.ndarray
    argmin: np.ndarray  # value of `reduced` attaining the minimum

    def dips(self) -> list[int]:
        """Indices of interior local minima of the profile."""
        v = self.values
        return [i for i in range(1, len(v) - 1) if v[i] < v[i - 1] and v[i] < v[i + 1]]


def min_over_axis(surface: SweepSurface, axis: str) -> MinProfile:
    """Minimise a 2-D surface over parameter ``axis``."""
    if surface.ndim != 2:
        raise ValueError("min_over_axis needs a 2-D surface")
    k = surface.axis_index(axis)
    keep = 1 - k
    values = np.asarray(surface.values)
    idx = np.argmin(values, axis=k)
    mins = np.min(values, axis=k)
    return MinProfile(
        parameter=surface.parameters[keep],
        reduced=axis,
        grid=surface.grid[keep],
        values=mins,
        argmin=surface.grid[k][idx],
    )


def barrier_check(surface: SweepSurface, m1: Minimum, m2: Minimum) -> float:
    """Height of the lowest pass between two minima above the higher of them.

    The pass is the minimax value over all grid paths joining the minima
    (8-neighbour adjacency in 2-D). A positive result means the minima are
    separated by a barrier.
    """
    values = np.asarray(surface.values)
    shape = values.shape
    start, goal = tuple(m1.index), tuple(m2.index)
    best = {start: values[start]}
    heap = [(values[start], start)]
    saddle = None
    while heap:
        height, cur = heapq.heappop(heap)
        if cur == goal:
            saddle = height
            break
        if height > best.get(cur, np.inf):
            continue
        for nb in _neighbours(cur, shape):
            h = max(height, values[nb])
            if h < best.get(nb, np.inf):
                best[nb] = h
                heapq.heappush(heap, (h, nb))
    return float(saddle - max(values[start], values[goal]))
