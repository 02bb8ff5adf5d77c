"""Time propagation of the master equation and running quadrature of rho11."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import asdict, dataclass, replace
from typing import Any, TextIO

import numba
import numpy as np
from scipy.integrate import solve_ivp

from .core import UNITS, ModelSpec
from .dynamics import derivative, model_params

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "IntegrationError",
    "StepSizeError",
    "DivergenceError",
    "default_step",
    "propagate",
    "running_simpson",
    "beat_amplitude",
    "convergence_probe",
    "TRAJECTORY_COLUMNS",
]

_METHOD_ALIASES = {
    "rk4": "rk4",
    "fixed": "rk4",
    "fixed-step-4th-order": "rk4",
    "adaptive": "adaptive",
    "adaptive-embedded": "adaptive",
}


class IntegrationError(RuntimeError):
    """Propagation failed at internal time ``time``."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t = {time:.6g} internal = {time * UNITS.time_unit_fs:.6g} fs)")
        self.time = time


class StepSizeError(IntegrationError):
    pass


class DivergenceError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``method`` is ``"rk4"`` (classical fixed step) or ``"adaptive"`` (embedded
    Dormand-Prince pair). ``step=None`` picks ``period / points_per_period``
    from the shortest of the vibron and beat periods. ``sample_interval=None``
    samples every step in fixed mode.
    """

    method: str = "rk4"
    step: float | None = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    sample_interval: float | None = None
    points_per_period: int = 1000

    def __post_init__(self) -> None:
        if self.method not in _METHOD_ALIASES:
            raise ValueError(f"unknown integration method {self.method!r}; use one of {sorted(_METHOD_ALIASES)}")
        object.__setattr__(self, "method", _METHOD_ALIASES[self.method])
        if self.step is not None and not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if self.sample_interval is not None and not self.sample_interval > 0:
            raise ValueError(f"sample_interval must be > 0, got {self.sample_interval}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.points_per_period < 4:
            raise ValueError("points_per_period must be >= 4")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 2, 2) complex
    rho11_integral: np.ndarray

    @property
    def rho11(self) -> np.ndarray:
        return self.states[:, 0, 0].real

    @property
    def rho22(self) -> np.ndarray:
        return self.states[:, 1, 1].real

    @property
    def rho12(self) -> np.ndarray:
        return self.states[:, 0, 1]

    @property
    def trace(self) -> np.ndarray:
        return self.rho11 + self.rho22

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def write_csv(self, dest: str | os.PathLike | TextIO) -> None:
        if isinstance(dest, (str, os.PathLike)):
            with open(dest, "w", newline="") as fh:
                self._write(fh)
        else:
            self._write(dest)

    def to_csv(self) -> str:
        buf = io.StringIO()
        self._write(buf)
        return buf.getvalue()

    def _write(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        fs = UNITS.time_unit_fs
        for t, rho, integral in zip(self.times, self.states, self.rho11_integral):
            p1, p2 = rho[0, 0].real, rho[1, 1].real
            w.writerow([repr(float(v)) for v in (
                t, t * fs, p1, p2, rho[0, 1].real, rho[0, 1].imag, p1 + p2, integral, integral * fs,
            )])


TRAJECTORY_COLUMNS = (
    "t_internal", "t_fs", "rho11", "rho22", "re_rho12", "im_rho12", "trace",
    "rho11_integral", "rho11_integral_fs",
)


def default_step(model: ModelSpec, points_per_period: int = 1000) -> float:
    """Shortest of the vibron and beat periods divided by ``points_per_period``."""
    periods = []
    if model.drive.omega > 0:
        periods.append(2.0 * math.pi / model.drive.omega)
    if model.beat_frequency > 0:
        periods.append(2.0 * math.pi / model.beat_frequency)
    if not periods:
        # nothing oscillates; the rates set the only time scale
        g, s = model.dissipation, model.sink
        rate = max(g.gamma_minus + g.gamma_plus, s.s1, s.s2, 1.0)
        periods.append(1.0 / rate)
    return min(periods) / points_per_period


def running_simpson(values: np.ndarray, dx: float) -> np.ndarray:
    """Running integral of uniformly sampled ``values``.

    Composite Simpson up to every even sample; odd samples add a trapezoid
    over the last half panel.
    """
    f = np.asarray(values, dtype=float)
    out = np.zeros_like(f)
    if f.size < 2:
        return out
    panels = dx / 3.0 * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
    out[2::2] = np.cumsum(panels)
    out[1::2] = out[0:-1:2] + 0.5 * dx * (f[0:-1:2] + f[1::2])
    return out


@numba.njit(cache=True, nogil=True)
def _rk4(prm, y0, h, n_steps, stride):
    n_samples = n_steps // stride + 1
    out = np.empty((n_samples, 4))
    p1, p2, x, y = y0[0], y0[1], y0[2], y0[3]
    out[0, 0], out[0, 1], out[0, 2], out[0, 3] = p1, p2, x, y
    half = 0.5 * h
    for k in range(n_steps):
        t = k * h
        a1, a2, a3, a4 = derivative(p1, p2, x, y, t, prm)
        b1, b2, b3, b4 = derivative(p1 + half * a1, p2 + half * a2, x + half * a3, y + half * a4, t + half, prm)
        c1, c2, c3, c4 = derivative(p1 + half * b1, p2 + half * b2, x + half * b3, y + half * b4, t + half, prm)
        d1, d2, d3, d4 = derivative(p1 + h * c1, p2 + h * c2, x + h * c3, y + h * c4, t + h, prm)
        p1 += h / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        p2 += h / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        x += h / 6.0 * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
        y += h / 6.0 * (a4 + 2.0 * b4 + 2.0 * c4 + d4)
        if not (math.isfinite(p1) and math.isfinite(p2) and math.isfinite(x) and math.isfinite(y)):
            return out, k + 1
        if (k + 1) % stride == 0:
            i = (k + 1) // stride
            out[i, 0], out[i, 1], out[i, 2], out[i, 3] = p1, p2, x, y
    return out, -1


def _to_real(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"rho0 must be 2x2, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("rho0 must be finite")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ValueError("rho0 must be Hermitian")
    # symmetrize: the real coordinates only carry the Hermitian part
    c = 0.5 * (rho[0, 1] + np.conj(rho[1, 0]))
    return np.array([rho[0, 0].real, rho[1, 1].real, c.real, c.imag])


def _to_states(y: np.ndarray) -> np.ndarray:
    states = np.empty((y.shape[0], 2, 2), dtype=complex)
    states[:, 0, 0] = y[:, 0]
    states[:, 1, 1] = y[:, 1]
    states[:, 0, 1] = y[:, 2] + 1j * y[:, 3]
    states[:, 1, 0] = y[:, 2] - 1j * y[:, 3]
    return states


def _sample_grid(t_end: float, step: float, sample_interval: float | None) -> tuple[int, int, float]:
    """Return (n_steps, stride, h) with an even number of sample intervals ending at t_end."""
    stride = 1 if sample_interval is None else max(1, round(sample_interval / step))
    n_samples = max(2, math.ceil(t_end / (stride * step) - 1e-9))
    n_samples += n_samples % 2
    n_steps = n_samples * stride
    return n_steps, stride, t_end / n_steps


def propagate(
    model: ModelSpec,
    rho0: np.ndarray,
    t_end: float,
    cfg: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate the master equation from ``rho0`` over ``[0, t_end]``.

    Raises
    ------
    StepSizeError
        Adaptive mode could not meet the tolerance.
    DivergenceError
        The state became non-finite.
    """
    cfg = cfg or IntegratorConfig()
    if not t_end > 0:
        raise ValueError(f"t_end must be > 0, got {t_end}")
    y0 = _to_real(rho0)
    prm = model_params(model)
    step = cfg.step if cfg.step is not None else default_step(model, cfg.points_per_period)

    if cfg.method == "rk4":
        n_steps, stride, h = _sample_grid(t_end, step, cfg.sample_interval)
        y, failed_at = _rk4(prm, y0, h, n_steps, stride)
        if failed_at >= 0:
            raise DivergenceError("state became non-finite", failed_at * h)
        times = np.arange(y.shape[0]) * (h * stride)
        times[-1] = t_end
        dt = h * stride
    else:
        interval = cfg.sample_interval if cfg.sample_interval is not None else 10.0 * step
        n_samples = max(2, math.ceil(t_end / interval - 1e-9))
        n_samples += n_samples % 2
        times = np.linspace(0.0, t_end, n_samples + 1)
        dt = t_end / n_samples
        y = _adaptive(prm, y0, times, cfg)

    return Trajectory(times=times, states=_to_states(y), rho11_integral=running_simpson(y[:, 0], dt))


def _adaptive(prm: np.ndarray, y0: np.ndarray, times: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    def fun(t, y):
        return derivative(y[0], y[1], y[2], y[3], t, prm)

    with np.errstate(all="ignore"):
        sol = solve_ivp(
            fun, (0.0, times[-1]), y0, method="DOP853", t_eval=times,
            rtol=cfg.rel_tol, atol=cfg.abs_tol,
        )
    if sol.status != 0:
        t = np.asarray(sol.t)
        t_fail = float(t[-1]) if t.size else 0.0
        if not np.all(np.isfinite(np.asarray(sol.y))):
            raise DivergenceError(f"state became non-finite: {sol.message}", t_fail)
        raise StepSizeError(f"adaptive step size underflow: {sol.message}", t_fail)
    y = sol.y.T
    if not np.all(np.isfinite(y)):
        bad = int(np.argmax(~np.all(np.isfinite(y), axis=1)))
        raise DivergenceError("state became non-finite", float(times[bad]))
    return np.ascontiguousarray(y)


def beat_amplitude(j: float, delta: float, e_mean: float, t):
    """Closed-system transition amplitude <2| exp(-i t H) |1>.

    ``J / (2 r) exp(-i t E+) (1 - exp(2 i t r))`` with ``r = sqrt(J^2 + Delta^2)``
    and ``E+ = e_mean + r``. ``t`` may be an array.
    """
    r = math.hypot(j, delta)
    if r == 0.0:
        raise ValueError("beat amplitude is undefined for j = delta = 0")
    t = np.asarray(t, dtype=float)
    return j / (2.0 * r) * np.exp(-1j * t * (e_mean + r)) * (1.0 - np.exp(2j * t * r))


def convergence_probe(
    model: ModelSpec,
    rho0: np.ndarray,
    t_end: float,
    cfg: IntegratorConfig | None = None,
) -> float:
    """Frobenius distance between final states at two resolutions.

    Fixed mode compares step h with h/2; adaptive mode compares the tolerances
    with tolerances / 10.
    """
    cfg = cfg or IntegratorConfig()
    if cfg.method == "rk4":
        step = cfg.step if cfg.step is not None else default_step(model, cfg.points_per_period)
        coarse = replace(cfg, step=step)
        fine = replace(cfg, step=0.5 * step)
    else:
        coarse = cfg
        fine = replace(cfg, rel_tol=cfg.rel_tol / 10.0, abs_tol=cfg.abs_tol / 10.0)
    a = propagate(model, rho0, t_end, coarse).final
    b = propagate(model, rho0, t_end, fine).final
    return float(np.linalg.norm(a - b))
