import functools
import math

import numpy as np
import pytest

from quantum_ratchet.config import build, resolve_config
from quantum_ratchet.core import DissipationSpec, DriveSpec, ModelSpec, SinkSpec
from quantum_ratchet.sweep import run_sweep

# populated by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []

WINDOW_340 = 4 * math.pi / 3.40
WINDOW_335 = 4 * math.pi / 3.35


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rc_model():
    """Reaction-centre model: 300 sin(340 t) vibron, gamma- = 60 cm^-1, s2 = 0.1."""
    return ModelSpec(
        e1=3.0,
        e2=0.0,
        j=0.75,
        drive=DriveSpec(a1=0.0, a2=3.0, omega=3.40, phi=0.0),
        dissipation=DissipationSpec(gamma_minus=0.6, ratio=0.22),
        sink=SinkSpec(s1=0.0, s2=0.1),
    )


def random_hermitian(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return scale * 0.5 * (a + a.conj().T)


def random_density(rng: np.random.Generator, trace: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    return trace * rho / np.trace(rho).real


@functools.lru_cache(maxsize=None)
def preset_run(name: str, *overrides: str):
    """Typed run configuration of a preset with ``--set`` style overrides."""
    return build(resolve_config(name, overrides=overrides))


@functools.lru_cache(maxsize=None)
def preset_surface(name: str, *overrides: str):
    """Sweep surface of a preset, computed once per session."""
    return run_sweep(preset_run(name, *overrides).sweep)
