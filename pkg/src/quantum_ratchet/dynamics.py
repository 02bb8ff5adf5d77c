"""Right-hand side of the driven, dissipative two-level master equation.

    drho/dt = -i [H(t), rho] + L(rho) + S(rho)

with ``H(t) = [[E1 + a1 q, J], [J, E2 + a2 q]]``, the two-channel GKSL
dissipator ``L`` between levels 1 and 2, and the diagonal sink ``S``. In
feedback mode the vibron factor ``q`` is scaled by the instantaneous trace,
which makes the equation nonlinear in ``rho``.

The matrix functions here are the readable reference. ``derivative`` is the
same right-hand side in real coordinates ``(rho11, rho22, Re rho12, Im rho12)``,
compiled with numba for the integrator.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from .core import DissipationSpec, ModelSpec, SinkSpec, basis_state

__all__ = [
    "vibron",
    "hamiltonian_at",
    "dissipator",
    "sink_term",
    "gksl_truncation_check",
    "thermal_ratio",
    "thermal_dissipation",
    "rhs",
    "model_params",
    "derivative",
]

_P1 = basis_state(1)
_P2 = basis_state(2)


def vibron(model: ModelSpec, t: float, rho: np.ndarray | None = None) -> float:
    """Dimensionless vibron factor q at time ``t``.

    Open loop: ``sin(omega t + phi)``. Feedback: ``(rho11 + rho22) sin(omega t)``,
    which needs the current state ``rho``.
    """
    d = model.drive
    if d.feedback:
        if rho is None:
            raise ValueError("feedback drive needs the current state rho")
        trace = float(np.real(rho[0, 0]) + np.real(rho[1, 1]))
        return trace * math.sin(d.omega * t)
    return math.sin(d.omega * t + d.phi)


def hamiltonian_at(model: ModelSpec, t: float, rho: np.ndarray | None = None) -> np.ndarray:
    q = vibron(model, t, rho)
    d = model.drive
    return np.array(
        [[model.e1 + d.a1 * q, model.j], [model.j, model.e2 + d.a2 * q]],
        dtype=complex,
    )


def _anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def dissipator(rho: np.ndarray, d: DissipationSpec) -> np.ndarray:
    """Two-channel GKSL term: uphill 2 -> 1 at gamma_plus, downhill 1 -> 2 at gamma_minus."""
    rho = np.asarray(rho, dtype=complex)
    up = rho[1, 1].real * _P1 - 0.5 * _anticommutator(rho, _P2)
    down = rho[0, 0].real * _P2 - 0.5 * _anticommutator(rho, _P1)
    return d.gamma_plus * up + d.gamma_minus * down


def sink_term(rho: np.ndarray, s: SinkSpec) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.diag([-s.s1 * rho[0, 0].real, -s.s2 * rho[1, 1].real]).astype(complex)


def gksl_truncation_check(rho: np.ndarray, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Compare a projected GKSL jump term with the sink term it truncates to.

    Returns ``(P_A G P_A, -s <A|rho|A> |A><A|)`` where
    ``G = s (<A|rho|A> |B><B| - {rho, |A><A|} / 2)``, ``A = 1`` and ``B = 2``.
    The two matrices agree for every Hermitian ``rho``.
    """
    rho = np.asarray(rho, dtype=complex)
    pop_a = rho[0, 0].real
    g = s * (pop_a * _P2 - 0.5 * _anticommutator(rho, _P1))
    projected = _P1 @ g @ _P1
    sink = -s * pop_a * _P1
    return projected, sink


def thermal_ratio(beta_inverse: float, delta_e: float) -> float:
    """Detailed-balance ratio gamma_plus / gamma_minus = exp(-delta_e / beta_inverse)."""
    if not beta_inverse > 0:
        raise ValueError(f"beta_inverse must be > 0, got {beta_inverse}")
    return math.exp(-delta_e / beta_inverse)


def thermal_dissipation(gamma_minus: float, beta_inverse: float, delta_e: float) -> DissipationSpec:
    return DissipationSpec(gamma_minus=gamma_minus, ratio=thermal_ratio(beta_inverse, delta_e))


def rhs(model: ModelSpec, t: float, rho: np.ndarray) -> np.ndarray:
    """Time derivative of ``rho`` at time ``t`` (matrix form)."""
    rho = np.asarray(rho, dtype=complex)
    h = hamiltonian_at(model, t, rho)
    return -1j * (h @ rho - rho @ h) + dissipator(rho, model.dissipation) + sink_term(rho, model.sink)


# -- compiled kernel ---------------------------------------------------------

# layout of the parameter vector passed to the compiled kernels
PARAM_NAMES = (
    "e1", "e2", "j", "a1", "a2", "omega", "phi", "feedback",
    "gamma_minus", "gamma_plus", "s1", "s2",
)


def model_params(model: ModelSpec) -> np.ndarray:
    d, g, s = model.drive, model.dissipation, model.sink
    return np.array(
        [
            model.e1, model.e2, model.j, d.a1, d.a2, d.omega, d.phi,
            1.0 if d.feedback else 0.0,
            g.gamma_minus, g.gamma_plus, s.s1, s.s2,
        ],
        dtype=np.float64,
    )


@numba.njit(cache=True, nogil=True)
def derivative(p1, p2, x, y, t, prm):
    """Real-coordinate right-hand side; rho12 = x + i y."""
    e1, e2, j, a1, a2, omega, phi, feedback = prm[0], prm[1], prm[2], prm[3], prm[4], prm[5], prm[6], prm[7]
    gm, gp, s1, s2 = prm[8], prm[9], prm[10], prm[11]
    if feedback != 0.0:
        q = (p1 + p2) * math.sin(omega * t)
    else:
        q = math.sin(omega * t + phi)
    split = (e1 + a1 * q) - (e2 + a2 * q)
    # -i[H, rho]: populations exchange through Im rho12, coherence precesses at `split`
    dp1 = -2.0 * j * y + gp * p2 - gm * p1 - s1 * p1
    dp2 = 2.0 * j * y - gp * p2 + gm * p1 - s2 * p2
    half = 0.5 * (gp + gm)
    dx = split * y - half * x
    dy = -split * x + j * (p1 - p2) - half * y
    return dp1, dp2, dx, dy
