import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import WINDOW_340, preset_run, preset_surface
from quantum_ratchet.core import ModelSpec
from quantum_ratchet.integrate import IntegratorConfig
from quantum_ratchet.objective import ObjectiveSpec
from quantum_ratchet.sweep import (
    SweepAxis,
    SweepError,
    SweepSpec,
    SweepSurface,
    apply_parameter,
    barrier_check,
    find_minima,
    load_surface,
    min_over_axis,
    run_sweep,
)

BASE = ModelSpec(3.0, 0.0, 0.75)


def synthetic(values, parameters=("frequency", "amplitude"), t0=1.0):
    """Wrap an array as a surface on unit-spaced axes."""
    values = np.asarray(values, dtype=float)
    axes = tuple(SweepAxis(p, 0.0, n - 1.0, n) for p, n in zip(parameters, values.shape))
    spec = SweepSpec(axes, BASE, ObjectiveSpec(t0))
    return SweepSurface(spec, tuple(a.values for a in axes), values)


def bowl(n=9, centre=(4, 4)):
    i, j = np.indices((n, n))
    return (i - centre[0]) ** 2 + (j - centre[1]) ** 2 + 1.0


def two_wells():
    """Two basins at (2, 2) and (2, 8) separated by a ridge of height 3 at column 5."""
    _, j = np.indices((5, 11))
    v = np.minimum((j - 2) ** 2 * 0.5, (j - 8) ** 2 * 0.5 + 0.5) + 1.0
    i, _ = np.indices((5, 11))
    return v + 0.25 * (i - 2) ** 2


class TestAxes:
    def test_values_and_step(self):
        a = SweepAxis("frequency", 0.5, 5.0, 451)
        assert a.values[0] == 0.5 and a.values[-1] == 5.0
        assert a.step == pytest.approx(0.01)

    @pytest.mark.parametrize(
        "args",
        [("colour", 0, 1, 3), ("frequency", 1.0, 0.0, 3), ("frequency", 0.0, 1.0, 1), ("frequency", 0.0, 1.0, 2.5)],
    )
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            SweepAxis(*args)

    def test_spec_validation(self):
        a = SweepAxis("frequency", 1, 2, 3)
        with pytest.raises(ValueError, match="1 or 2"):
            SweepSpec((a, SweepAxis("amplitude", 1, 2, 3), SweepAxis("phase", 1, 2, 3)), BASE, ObjectiveSpec(1.0))
        with pytest.raises(ValueError, match="distinct"):
            SweepSpec((a, a), BASE, ObjectiveSpec(1.0))
        with pytest.raises(ValueError, match="objective"):
            SweepSpec((a,), BASE, ObjectiveSpec(1.0), objective="speed")
        with pytest.raises(ValueError, match="phase"):
            SweepSpec((SweepAxis("phase", -1, 1, 3),), BASE.with_drive(feedback=True), ObjectiveSpec(1.0))

    def test_apply_parameter(self):
        m = apply_parameter(apply_parameter(BASE, "amplitude", 2.0), "gamma_minus", 0.3)
        assert m.drive.a2 == 2.0 and m.dissipation.gamma_minus == 0.3
        assert apply_parameter(BASE, "phase", 0.4).drive.phi == 0.4
        with pytest.raises(ValueError):
            apply_parameter(BASE, "j", 1.0)

    def test_spec_round_trip(self):
        spec = SweepSpec((SweepAxis("amplitude", 0, 6, 13),), BASE, ObjectiveSpec(2.0), "recombination_rate")
        assert SweepSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


class TestFindMinima:
    def test_bowl(self):
        (m,) = find_minima(synthetic(bowl()))
        assert m.index == (4, 4) and m.kind == "global" and m.value == 1.0
        assert m.location == {"frequency": 4.0, "amplitude": 4.0}
        assert m.basin_flatness == pytest.approx(2.0)  # corners of the 3x3 box sit at 3

    def test_two_wells(self):
        minima = find_minima(synthetic(two_wells()))
        assert [(m.index, m.kind) for m in minima] == [((2, 2), "global"), ((2, 8), "local")]

    def test_plateau_counts_once(self):
        v = np.full((7, 7), 5.0)
        v[2:5, 2:5] = 1.0
        (m,) = find_minima(synthetic(v))
        assert m.index == (2, 2) and m.kind == "global"

    def test_plateau_touching_edge_is_not_a_minimum(self):
        v = np.full((6, 6), 5.0)
        v[0:3, 2:4] = 1.0
        minima = find_minima(synthetic(v))
        assert [m.kind for m in minima] == ["boundary"]

    def test_monotone_reports_boundary(self):
        v = np.add.outer(np.arange(6.0), np.arange(5.0))
        (m,) = find_minima(synthetic(v))
        assert m.kind == "boundary" and m.index == (0, 0)

    def test_interior_local_with_boundary_global(self):
        v = np.array([0.0, 2.0, 1.0, 2.0, 3.0])
        minima = find_minima(synthetic(v, ("frequency",)))
        assert [(m.index, m.kind) for m in minima] == [((2,), "local"), ((0,), "boundary")]

    def test_depth_and_significance(self):
        v = np.array([3.0, 1.0, 2.0, 1.995, 2.5])
        a, b = find_minima(synthetic(v, ("frequency",), t0=1.0), flatness_radius=None)
        # the right flank runs to the edge, so the reference level is min(3, 2.5)
        assert a.depth == pytest.approx(1.5) and a.significant
        assert b.depth == pytest.approx(0.005) and not b.significant

    def test_flatness_none_near_edge(self):
        (m,) = find_minima(synthetic(bowl(centre=(1, 4))), flatness_radius=2)
        assert m.basin_flatness is None

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(3, 8), st.integers(3, 8)), elements=st.floats(0, 10)))
    def test_global_matches_exhaustive_search(self, v):
        minima = find_minima(synthetic(v), flatness_radius=None)
        least = [m for m in minima if m.kind in ("global", "boundary")]
        assert least and all(m.value == pytest.approx(v.min(), abs=1e-12) for m in least)
        for m in minima:
            i, j = m.index
            if m.kind != "boundary":
                assert 0 < i < v.shape[0] - 1 and 0 < j < v.shape[1] - 1
                assert m.value <= v[i - 1 : i + 2, j - 1 : j + 2].min() + 1e-12


class TestProfile:
    def test_dominated(self):
        v = two_wells()
        s = synthetic(v)
        prof = min_over_axis(s, "frequency")
        assert prof.parameter == "amplitude" and prof.reduced == "frequency"
        assert np.all(prof.values <= v.min(axis=0) + 0)
        for k, a in enumerate(prof.argmin):
            assert v[int(a), k] == prof.values[k]
        assert prof.dips() == [2, 8]

    def test_constant_along_reduced_axis(self):
        row = np.array([3.0, 1.0, 2.0, 0.5, 4.0])
        s = synthetic(np.tile(row, (6, 1)))
        np.testing.assert_array_equal(min_over_axis(s, "frequency").values, row)

    def test_needs_2d(self):
        with pytest.raises(ValueError, match="2-D"):
            min_over_axis(synthetic([1.0, 0.0, 1.0], ("frequency",)), "frequency")

    def test_unknown_axis(self):
        with pytest.raises(ValueError, match="phase"):
            min_over_axis(synthetic(bowl()), "phase")


class TestBarrier:
    def test_two_wells(self):
        s = synthetic(two_wells())
        g, l = find_minima(s)
        # the cheapest crossing runs along row 2 over the ridge at column 5
        ridge = two_wells()[2, 5]
        assert barrier_check(s, g, l) == pytest.approx(ridge - l.value)
        assert barrier_check(s, l, g) == barrier_check(s, g, l)

    def test_same_point(self):
        s = synthetic(bowl())
        (m,) = find_minima(s)
        assert barrier_check(s, m, m) == 0.0

    def test_valley_has_no_barrier(self):
        v = np.full((5, 9), 9.0)
        v[2, 1:8] = np.linspace(1.0, 2.0, 7)
        s = synthetic(v)
        lo = find_minima(s)[0]
        hi = type(lo)(index=(2, 7), location={}, value=2.0, kind="local")
        assert barrier_check(s, lo, hi) == 0.0


class TestRun:
    spec = SweepSpec(
        (SweepAxis("amplitude", 0.0, 6.0, 5), SweepAxis("frequency", 1.0, 4.0, 4)),
        BASE.with_drive(a2=3.0, omega=3.4).with_dissipation(gamma_minus=0.6, ratio=0.22).with_sink(s2=0.1),
        ObjectiveSpec(WINDOW_340),
    )

    def test_shape_and_metadata(self):
        s = run_sweep(self.spec)
        assert s.values.shape == (5, 4)
        assert np.all((s.values > 0) & (s.values <= WINDOW_340))
        assert {"timestamp", "engine_version", "python", "integrator", "workers"} <= set(s.metadata)

    def test_workers_do_not_change_values(self):
        a = run_sweep(self.spec, workers=1)
        b = run_sweep(self.spec, workers=4)
        np.testing.assert_array_equal(a.values, b.values)

    def test_recombination_objective(self):
        spec = SweepSpec((SweepAxis("gamma_minus", 0.0, 1.0, 3),), self.spec.base, self.spec.window, "recombination_rate")
        s = run_sweep(spec)
        tb = run_sweep(SweepSpec(spec.axes, spec.base, spec.window)).values
        expected = (0.5 + 0.22 * np.array([0.0, 0.5, 1.0])) * tb
        np.testing.assert_allclose(s.values, expected, rtol=1e-14)

    def test_failure_carries_coordinates(self):
        spec = SweepSpec(
            (SweepAxis("gamma_minus", 1.0, 1e6, 2),),
            BASE.with_drive(a2=3.0, omega=3.4),
            ObjectiveSpec(10.0),
            integrator=IntegratorConfig(step=0.5),
        )
        with pytest.raises(SweepError) as info:
            run_sweep(spec)
        assert info.value.coordinates == {"gamma_minus": 1e6}

    def test_csv_and_json(self, tmp_path):
        s = run_sweep(self.spec)
        s.write_csv(tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "amplitude_internal,amplitude_cm1,frequency_internal,frequency_cm1,t_bar_internal,t_bar_fs"
        assert len(lines) == 1 + 20
        first = [float(x) for x in lines[1].split(",")]
        assert first[:4] == [0.0, 0.0, 1.0, 100.0]
        assert first[4] == s.values[0, 0] and first[5] == pytest.approx(50 * s.values[0, 0])

        s.write_json(tmp_path / "s.json", find_minima(s), note="x")
        doc = json.loads((tmp_path / "s.json").read_text())
        assert doc["note"] == "x" and "minima" in doc
        back = load_surface(tmp_path / "s.json")
        assert back.spec == s.spec
        np.testing.assert_array_equal(back.values, s.values)

    def test_phase_and_rate_headers(self):
        s = synthetic([1.0, 0.0, 1.0], ("phase",))
        assert s.csv_header() == ["phase_rad", "t_bar_internal", "t_bar_fs"]
        spec = SweepSpec((SweepAxis("gamma_minus", 0, 1, 3),), BASE, ObjectiveSpec(1.0), "recombination_rate")
        assert SweepSurface(spec, (spec.axes[0].values,), np.zeros(3)).csv_header()[-1] == "recombination_rate"


def _interior(surface):
    return [m for m in find_minima(surface, flatness_radius=None) if m.kind != "boundary"]


class TestRefinement:
    def test_frequency_scan(self):
        coarse = preset_surface("fig4a", 'sweep.axes=[{"parameter": "frequency", "start": 0.5, "stop": 5.0, "count": 226}]')
        fine = preset_surface("fig4a")
        step = coarse.spec.axes[0].step
        for m in _interior(coarse):
            nearest = min(abs(f.location["frequency"] - m.location["frequency"]) for f in _interior(fine))
            assert nearest <= step + 1e-12

    def test_landscape(self):
        coarse = preset_surface(
            "fig3d",
            'sweep.axes=[{"parameter": "amplitude", "start": 0.5, "stop": 6.0, "count": 56},'
            ' {"parameter": "frequency", "start": 0.5, "stop": 5.0, "count": 46}]',
        )
        fine = preset_surface("fig3d")
        steps = [a.step for a in coarse.spec.axes]
        fine_min = _interior(fine)
        for m in _interior(coarse):
            ok = any(
                all(abs(f.location[p] - m.location[p]) <= s + 1e-12 for p, s in zip(coarse.parameters, steps))
                for f in fine_min
            )
            assert ok, m.location


def test_preset_sweeps_build():
    for name in ("fig4a", "fig4b", "fig4c", "fig4d", "fig35", "fig3d"):
        run = preset_run(name)
        assert run.sweep is not None
        assert all(math.isfinite(a.step) for a in run.sweep.axes)
