"""Domain types, unit conventions and 2x2 Hermitian algebra.

Internal units: energies in hundreds of cm^-1 with hbar = 1, so one internal
time unit is hbar / (100 cm^-1). Reported femtoseconds use the rounded value
of 50 fs per internal time unit; the exact value (~53.08 fs) is kept only for
reference.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

__all__ = [
    "UnitSystem",
    "UNITS",
    "convert",
    "DriveSpec",
    "DissipationSpec",
    "SinkSpec",
    "ModelSpec",
    "basis_state",
    "hermitize",
    "eigensystem",
    "hamiltonian_matrix",
]


@dataclass(frozen=True)
class UnitSystem:
    energy_unit_cm: float = 100.0
    time_unit_fs: float = 50.0
    # hbar / (100 cm^-1) = 1 / (2 pi c * 100 cm^-1); documentation only
    exact_time_unit_fs: float = 1e15 / (2.0 * math.pi * 2.99792458e10 * 100.0)


UNITS = UnitSystem()

_ENERGY_UNITS = {"internal-energy": 1.0, "cm-1": UNITS.energy_unit_cm}
_TIME_UNITS = {"internal-time": 1.0, "fs": UNITS.time_unit_fs}
_ALIASES = {
    "internal_energy": "internal-energy",
    "energy": "internal-energy",
    "cm^-1": "cm-1",
    "cm1": "cm-1",
    "cm⁻¹": "cm-1",
    "internal_time": "internal-time",
    "time": "internal-time",
}


def _canonical_unit(unit: str) -> str:
    u = unit.strip()
    return _ALIASES.get(u, u)


def convert(value: float, from_unit: str, to_unit: str) -> float:
    """Convert ``value`` between internal units, cm^-1 and fs.

    Parameters
    ----------
    value : float
        Quantity expressed in ``from_unit``.
    from_unit, to_unit : str
        One of ``internal-energy``, ``cm-1``, ``internal-time``, ``fs``.

    Raises
    ------
    ValueError
        For unknown units or an energy <-> time conversion.
    """
    src, dst = _canonical_unit(from_unit), _canonical_unit(to_unit)
    for table in (_ENERGY_UNITS, _TIME_UNITS):
        if src in table and dst in table:
            if src == dst:
                return value
            return value * table[dst] / table[src]
    known = sorted(_ENERGY_UNITS) + sorted(_TIME_UNITS)
    if src not in known or dst not in known:
        raise ValueError(f"unknown unit in conversion {from_unit!r} -> {to_unit!r}; known: {known}")
    raise ValueError(f"dimension mismatch: cannot convert {from_unit!r} to {to_unit!r}")


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class DriveSpec:
    """Classical vibron drive.

    ``a1`` and ``a2`` are the couplings of levels 1 and 2 to the vibron (the
    scalar products u.w and v.w); the amplitude quoted for the photosynthetic
    model is ``a2``. With ``feedback`` on the oscillation is scaled by the
    instantaneous trace and carries no phase, so ``phi`` is forced to zero.
    """

    a1: float = 0.0
    a2: float = 0.0
    omega: float = 0.0
    phi: float = 0.0
    feedback: bool = False

    def __post_init__(self) -> None:
        _check_finite(a1=self.a1, a2=self.a2, omega=self.omega, phi=self.phi)
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if self.feedback and self.phi != 0.0:
            object.__setattr__(self, "phi", 0.0)

    @property
    def amplitude(self) -> float:
        return abs(self.a2)

    @property
    def wrapped_phi(self) -> float:
        """Phase wrapped into (-pi, pi]."""
        w = math.remainder(self.phi, 2.0 * math.pi)
        return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class DissipationSpec:
    gamma_minus: float = 0.0
    ratio: float = 0.0

    def __post_init__(self) -> None:
        _check_finite(gamma_minus=self.gamma_minus, ratio=self.ratio)
        if self.gamma_minus < 0:
            raise ValueError(f"gamma_minus must be >= 0, got {self.gamma_minus}")
        if self.ratio < 0:
            raise ValueError(f"ratio must be >= 0, got {self.ratio}")

    @property
    def gamma_plus(self) -> float:
        return self.ratio * self.gamma_minus


@dataclass(frozen=True)
class SinkSpec:
    s1: float = 0.0
    s2: float = 0.0

    def __post_init__(self) -> None:
        _check_finite(s1=self.s1, s2=self.s2)
        if self.s1 < 0 or self.s2 < 0:
            raise ValueError(f"sink rates must be >= 0, got s1={self.s1}, s2={self.s2}")


@dataclass(frozen=True)
class ModelSpec:
    """Two-level system with vibron drive, GKSL dissipation and sink."""

    e1: float
    e2: float
    j: float
    drive: DriveSpec = field(default_factory=DriveSpec)
    dissipation: DissipationSpec = field(default_factory=DissipationSpec)
    sink: SinkSpec = field(default_factory=SinkSpec)

    def __post_init__(self) -> None:
        _check_finite(e1=self.e1, e2=self.e2, j=self.j)

    @property
    def delta(self) -> float:
        return 0.5 * (self.e1 - self.e2)

    @property
    def e_mean(self) -> float:
        return 0.5 * (self.e1 + self.e2)

    @property
    def beat_frequency(self) -> float:
        """Angular frequency of the undriven quantum beats, E+ - E-."""
        return 2.0 * math.hypot(self.j, self.delta)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ModelSpec:
        d = dict(d)
        try:
            kwargs = dict(
                e1=float(d.pop("e1")),
                e2=float(d.pop("e2")),
                j=float(d.pop("j")),
                drive=DriveSpec(**d.pop("drive", {})),
                dissipation=DissipationSpec(**d.pop("dissipation", {})),
                sink=SinkSpec(**d.pop("sink", {})),
            )
        except KeyError as exc:
            raise ValueError(f"model is missing required field {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ValueError(f"invalid model field: {exc}") from None
        if d:
            raise ValueError(f"unknown field(s) in model: {sorted(d)}")
        return cls(**kwargs)

    def with_drive(self, **changes: Any) -> ModelSpec:
        return replace(self, drive=replace(self.drive, **changes))

    def with_dissipation(self, **changes: Any) -> ModelSpec:
        return replace(self, dissipation=replace(self.dissipation, **changes))

    def with_sink(self, **changes: Any) -> ModelSpec:
        return replace(self, sink=replace(self.sink, **changes))


def basis_state(level: int) -> np.ndarray:
    """Projector |level><level| for level 1 or 2."""
    if level not in (1, 2):
        raise ValueError(f"level must be 1 or 2, got {level}")
    rho = np.zeros((2, 2), dtype=complex)
    rho[level - 1, level - 1] = 1.0
    return rho


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (m + m^dagger) / 2."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().swapaxes(-1, -2))


def hamiltonian_matrix(e1: float, e2: float, j: float) -> np.ndarray:
    return np.array([[e1, j], [j, e2]], dtype=complex)


def eigensystem(e1: float, e2: float, j: float):
    """Eigenvalues and eigenvectors of [[e1, j], [j, e2]].

    Returns
    -------
    (E_plus, E_minus, psi_plus, psi_minus)
        ``E_pm = E +- sqrt(J^2 + Delta^2)``. Eigenvectors are real unit
        vectors proportional to ``(Delta +- sqrt(J^2 + Delta^2), J)``, with
        the second component made non-negative. For ``J == 0`` the canonical
        basis vectors are returned, ordered by energy.
    """
    _check_finite(e1=e1, e2=e2, j=j)
    e = 0.5 * (e1 + e2)
    d = 0.5 * (e1 - e2)
    r = math.hypot(j, d)
    e_plus, e_minus = e + r, e - r
    if j == 0.0:
        one, two = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        if d >= 0:
            return e_plus, e_minus, one, two
        return e_plus, e_minus, two, one
    # Delta -+ r loses precision by cancellation; use Delta -+ r = -+J^2 / (r +- Delta)
    if d >= 0:
        top_plus = d + r
        top_minus = -j * (j / (d + r))
    else:
        top_plus = j * (j / (r - d))
        top_minus = d - r
    vecs = []
    for top in (top_plus, top_minus):
        v = np.array([top, j])
        v /= math.hypot(top, j)
        if v[1] < 0:
            v = -v
        vecs.append(v)
    return e_plus, e_minus, vecs[0], vecs[1]
