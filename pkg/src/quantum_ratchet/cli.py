"""Command-line driver: ``simulate``, ``sweep`` and ``presets``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .config import ConfigError, RunConfig, build, resolve_config
from .core import UNITS, basis_state
from .integrate import IntegrationError, propagate
from .objective import recombination_rate, t_bar
from .presets import catalog
from .sweep import SweepError, SweepSurface, barrier_check, find_minima, min_over_axis, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantum-ratchet",
        description="Simulate the vibron-driven two-level master equation and sweep its recombination objective.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--preset", help="named parameter set (see `presets`)")
        p.add_argument("--config", metavar="FILE", help="JSON configuration document")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override one field, e.g. drive.amplitude=0 (repeatable)")
        p.add_argument("--out", default=".", metavar="DIR", help="output directory (default: .)")
        p.add_argument("--feedback", action="store_true", help="use the state-dependent (feedback) vibron")
        p.add_argument("--json", action="store_true", help="print the run record as JSON")

    sim = sub.add_parser("simulate", help="propagate one trajectory and write it as CSV")
    common(sim)
    sw = sub.add_parser("sweep", help="evaluate the objective on a parameter grid")
    common(sw)
    sw.add_argument("--workers", type=int, default=1, metavar="N", help="parallel grid evaluations")
    pr = sub.add_parser("presets", help="list the named parameter sets")
    pr.add_argument("--json", action="store_true", help="machine-readable catalog")
    return parser


def _stem(cfg: dict[str, Any]) -> str:
    return cfg.get("preset") or "inline"


def _simulate(cfg: dict[str, Any], run: RunConfig, out: Path) -> tuple[list[str], dict[str, Any]]:
    t_end = run.t_end if run.t_end is not None else run.objective.t0
    traj = propagate(run.model, basis_state(1), t_end, run.integrator)
    path = out / f"{_stem(cfg)}_trajectory.csv"
    traj.write_csv(path)
    tb = t_bar(run.model, run.objective, run.integrator)
    results = {
        "t_end_internal": t_end,
        "t_bar_internal": tb,
        "t_bar_fs": tb * UNITS.time_unit_fs,
        "t0_internal": run.objective.t0,
        "t0_fs": run.objective.t0 * UNITS.time_unit_fs,
        "recombination_rate": recombination_rate(run.model.dissipation.gamma_minus, tb, run.objective),
        "final_trace": float(traj.trace[-1]),
    }
    return [str(path)], results


def _write_profile(path: Path, surface: SweepSurface, profile) -> None:
    unit = "t_bar" if surface.spec.objective == "t_bar" else "recombination_rate"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([
            f"{profile.parameter}_internal", f"{profile.parameter}_cm1",
            f"{unit}_min_internal", f"{unit}_min_fs" if unit == "t_bar" else f"{unit}_min",
            f"argmin_{profile.reduced}_internal", f"argmin_{profile.reduced}_cm1",
        ])
        scale = UNITS.time_unit_fs if unit == "t_bar" else 1.0
        for x, v, a in zip(profile.grid, profile.values, profile.argmin):
            w.writerow([repr(float(u)) for u in (x, x * UNITS.energy_unit_cm, v, v * scale, a, a * UNITS.energy_unit_cm)])


def _sweep(cfg: dict[str, Any], run: RunConfig, out: Path, workers: int) -> tuple[list[str], dict[str, Any]]:
    if run.sweep is None:
        raise ConfigError("sweep: this configuration has no sweep section")
    surface = run_sweep(run.sweep, workers=workers)
    minima = find_minima(surface, flatness_radius=run.flatness_radius, significance=run.significance)
    stem = _stem(cfg)
    outputs = []
    extra: dict[str, Any] = {"config": cfg}

    barriers = []
    if surface.ndim == 2:
        glob = [m for m in minima if m.kind == "global"]
        for g in glob:
            for m in minima:
                if m is not g and m.kind == "local":
                    barriers.append({"from": list(g.index), "to": list(m.index),
                                     "barrier": barrier_check(surface, g, m)})
        extra["barriers"] = barriers
    if run.profile_over is not None:
        profile = min_over_axis(surface, run.profile_over)
        path = out / f"{stem}_profile.csv"
        _write_profile(path, surface, profile)
        outputs.append(str(path))
        extra["profile"] = {
            "parameter": profile.parameter,
            "reduced": profile.reduced,
            "dips": [float(profile.grid[i]) for i in profile.dips()],
        }

    csv_path, json_path = out / f"{stem}_surface.csv", out / f"{stem}_surface.json"
    surface.write_csv(csv_path)
    surface.write_json(json_path, minima, **extra)
    outputs = [str(csv_path), str(json_path), *outputs]
    results = {"minima": [m.to_dict() for m in minima], "barriers": barriers}
    if "profile" in extra:
        results["profile_dips"] = extra["profile"]["dips"]
    return outputs, results


def _emit_record(out: Path | None, name: str, record: dict[str, Any], as_json: bool) -> None:
    if out is not None:
        try:
            with open(out / f"{name}_run.json", "w") as fh:
                json.dump(record, fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            print(f"error: cannot write run record: {exc}", file=sys.stderr)
    if as_json:
        json.dump(record, sys.stdout, indent=2)
        sys.stdout.write("\n")


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)

    if args.command == "presets":
        entries = catalog()
        if args.json:
            json.dump(entries, sys.stdout, indent=2)
            sys.stdout.write("\n")
        else:
            for e in entries:
                print(f"{e['name']:15s} {e['description']}  [{e['figure']}]")
        return EXIT_OK

    started = time.perf_counter()
    record: dict[str, Any] = {
        "command": args.command,
        "engine_version": __version__,
        "preset": args.preset,
        "config": None,
        "outputs": [],
        "status": "ok",
    }
    out: Path | None = None
    stem = args.preset or "inline"
    code = EXIT_OK
    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        cfg = resolve_config(args.preset, args.config, args.overrides, args.feedback)
        stem = _stem(cfg)
        record["config"] = cfg
        run = build(cfg)
        if args.command == "simulate":
            outputs, results = _simulate(cfg, run, out)
        else:
            outputs, results = _sweep(cfg, run, out, args.workers)
        record["outputs"] = outputs
        record["results"] = results
    except ConfigError as exc:
        code = EXIT_CONFIG
        record.update(status="config-error", error=str(exc))
        print(f"config error: {exc}", file=sys.stderr)
    except OSError as exc:
        code = EXIT_CONFIG
        out = None
        record.update(status="config-error", error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
    except (IntegrationError, SweepError) as exc:
        code = EXIT_NUMERIC
        record.update(status="numerical-failure", error=str(exc))
        if isinstance(exc, IntegrationError):
            record["failing_time_internal"] = exc.time
        else:
            record["failing_coordinates"] = exc.coordinates
        print(f"numerical failure: {exc}", file=sys.stderr)
    record["duration_s"] = time.perf_counter() - started
    _emit_record(out, stem, record, args.json)
    if code == EXIT_OK and not args.json:
        for path in record["outputs"]:
            print(f"wrote {path}")
        _summarise(record)
    return code


def _summarise(record: dict[str, Any]) -> None:
    res = record.get("results", {})
    if "t_bar_internal" in res:
        print(f"T_bar = {res['t_bar_internal']:.6f} internal = {res['t_bar_fs']:.3f} fs "
              f"(window {res['t0_fs']:.1f} fs), R = {res['recombination_rate']:.6f}")
    for m in res.get("minima", []):
        loc = ", ".join(f"{k}={v:.4g}" for k, v in m["location"].items())
        extra = "" if m["significant"] is None else (" significant" if m["significant"] else " marginal")
        print(f"{m['kind']:8s} minimum at {loc}: {m['value']:.6f}{extra}")
    for b in res.get("barriers", []):
        print(f"barrier {b['from']} -> {b['to']}: {b['barrier']:.6f}")


if __name__ == "__main__":
    sys.exit(main())
