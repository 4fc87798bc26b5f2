"""Command-line frontend.

Subcommands: simulate (one config -> time-series CSV), sweep (grid + FFT
grid over one drive parameter), floquet (quasi-energy table with the
measured and closed-form splittings side by side), fit (decay fit of a
trace CSV), materials (preset listing).

Configs are a single YAML file with unit-suffixed keys (_mhz, _us, _mt,
_deg).  Every key is checked; unknown keys are hard errors naming the
offending key, so typos cannot silently change an experiment.  Every
output CSV gets a JSON run manifest next to it (inputs echoed plus
package versions), and all outputs are deterministic byte-for-byte for a
given config and platform.

Exit codes: 0 ok, 2 usage, 3 config/validation, 4 runtime.
"""

from __future__ import annotations

import argparse
import json
import math
import multiprocessing
import os
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy
import yaml
from scipy.interpolate import CubicSpline

from .analysis import FitFailure, fit_exp_decay, sweep
from .drive import DriveConfig
from .dynamics import Environment, IntegrationError, TimeSeries, default_time_grid
from .floquet import (
    FloquetSpec,
    crossing_block_splitting,
    perturbative_splitting,
    quasi_energies,
    rabi_frequency,
    resonant_drive,
)
from .hamiltonians import (
    MATERIAL_INFO,
    EffectiveTLS,
    SpinSystem,
    material,
    material_names,
    reduce_to_tls,
)
from .sequences import (
    AcquireEcho,
    AcquireFID,
    Burst,
    EnsembleSpec,
    HardPulse,
    Prepare,
    SequenceError,
    Wait,
    run_sequence,
)

__all__ = ["ConfigError", "load_scenario", "main"]


class ConfigError(ValueError):
    """Invalid scenario config; the message names the offending key."""


# --------------------------------------------------------------------------
# config loading & validation

_TOP_KEYS = {
    "material",
    "cubic_a_mhz",
    "b0_mt",
    "level_pair",
    "f0_mhz",
    "drive",
    "environment",
    "ensemble",
    "sequence",
    "burst",
    "output",
}
_DRIVE_KEYS = {"delta_mhz", "h_d_mhz", "n_crossing", "h_i_mhz", "h_i_ratio", "phi_deg", "theta_deg"}
_ENV_KEYS = {"t1_us", "t2_us", "model"}
_ENSEMBLE_KEYS = {"sigma_mhz", "n_nodes"}
_OUTPUT_KEYS = {"directory", "basename"}
_BURST_KEYS = {"duration_us", "image_on"}
_SEGMENT_KINDS = ("prepare", "burst", "wait", "hard_pulse", "acquire_echo", "acquire_fid")
_INLINE_MATERIAL_KEYS = {
    "label",
    "s",
    "g",
    "i",
    "hyperfine_mhz",
    "hyperfine_sign",
    "cubic_a_mhz",
    "stevens",
    "field_orientation",
    "linewidth_mt",
}

SWEEPABLE = ("delta_mhz", "phi_deg", "h_i_mhz", "h_d_mhz")


def _check_keys(mapping: dict, allowed, path: str):
    for key in mapping:
        if key not in allowed:
            raise ConfigError("unknown config key: %s" % (path + "." + str(key) if path else str(key)))


def _as_map(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError("%s must be a mapping" % path)
    return value


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("%s must be a number" % path)
    v = float(value)
    if math.isnan(v):
        raise ConfigError("%s must not be NaN" % path)
    return v


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("%s must be an integer" % path)
    return int(value)


def _as_bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError("%s must be true or false" % path)
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError("%s must be a string" % path)
    return value


def load_config(path: str) -> dict:
    """Parse the YAML scenario file; structural errors become ConfigError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError("config file not found: %s" % path) from None
    except yaml.YAMLError as exc:
        raise ConfigError("config parse error in %s: %s" % (path, exc)) from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return raw


def _build_spin_system(cfg: dict) -> Tuple[Optional[SpinSystem], Optional[str]]:
    """Returns (spin system or None, preset name or None)."""
    spec = cfg.get("material")
    if spec is None:
        return None, None
    if isinstance(spec, str):
        if spec not in material_names():
            raise ConfigError("material: unknown preset %r (have %s)" % (spec, ", ".join(material_names())))
        cubic = cfg.get("cubic_a_mhz")
        if cubic is not None:
            cubic = _as_float(cubic, "cubic_a_mhz")
        try:
            return material(spec, cubic_a=cubic), spec
        except ValueError as exc:
            raise ConfigError("material: %s" % exc) from None
    spec = _as_map(spec, "material")
    _check_keys(spec, _INLINE_MATERIAL_KEYS, "material")
    for req in ("s", "g"):
        if req not in spec:
            raise ConfigError("material.%s is required for an inline spin system" % req)
    hyperfine = spec.get("hyperfine_mhz")
    if isinstance(hyperfine, (list, tuple)):
        hyperfine = tuple(_as_float(v, "material.hyperfine_mhz") for v in hyperfine)
    elif hyperfine is not None:
        hyperfine = _as_float(hyperfine, "material.hyperfine_mhz")
    stevens = {}
    for j, row in enumerate(spec.get("stevens") or []):
        if not (isinstance(row, (list, tuple)) and len(row) == 3):
            raise ConfigError("material.stevens[%d] must be a [k, q, B_mhz] triple" % j)
        stevens[(_as_int(row[0], "material.stevens.k"), _as_int(row[1], "material.stevens.q"))] = _as_float(
            row[2], "material.stevens.B"
        )
    orientation = spec.get("field_orientation", (0.0, 0.0, 1.0))
    if not (isinstance(orientation, (list, tuple)) and len(orientation) == 3):
        raise ConfigError("material.field_orientation must be a 3-vector")
    try:
        sys_ = SpinSystem(
            label=_as_str(spec.get("label", "inline"), "material.label"),
            S=_as_float(spec["s"], "material.s"),
            g=_as_float(spec["g"], "material.g"),
            I=_as_float(spec.get("i", 0.0), "material.i"),
            hyperfine=hyperfine,
            hyperfine_sign=_as_int(spec.get("hyperfine_sign", 1), "material.hyperfine_sign"),
            cubic_a=None if spec.get("cubic_a_mhz") is None else _as_float(spec["cubic_a_mhz"], "material.cubic_a_mhz"),
            stevens=stevens,
            field_orientation=tuple(_as_float(v, "material.field_orientation") for v in orientation),
            linewidth_mT=_as_float(spec.get("linewidth_mt", 0.0), "material.linewidth_mt"),
        )
    except ValueError as exc:
        raise ConfigError("material: %s" % exc) from None
    return sys_, None


def _build_environment(cfg: dict, preset: Optional[str]) -> Environment:
    env = _as_map(cfg.get("environment"), "environment")
    _check_keys(env, _ENV_KEYS, "environment")
    info = MATERIAL_INFO.get(preset, {})
    t1 = env.get("t1_us", info.get("t1_us"))
    t2 = env.get("t2_us", info.get("t2_us"))
    t1 = math.inf if t1 is None else _as_float(t1, "environment.t1_us")
    t2 = math.inf if t2 is None else _as_float(t2, "environment.t2_us")
    model = _as_str(env.get("model", "bloch_independent"), "environment.model")
    try:
        return Environment(T1=t1, T2=t2, model=model)
    except ValueError as exc:
        raise ConfigError("environment: %s" % exc) from None


def _build_drive(cfg: dict) -> DriveConfig:
    drive = _as_map(cfg.get("drive"), "drive")
    if not drive:
        raise ConfigError("drive block is required")
    _check_keys(drive, _DRIVE_KEYS, "drive")
    if "delta_mhz" not in drive:
        raise ConfigError("drive.delta_mhz is required")
    delta = _as_float(drive["delta_mhz"], "drive.delta_mhz")

    if ("h_d_mhz" in drive) == ("n_crossing" in drive):
        raise ConfigError("drive needs exactly one of h_d_mhz or n_crossing")
    if "n_crossing" in drive:
        n = _as_int(drive["n_crossing"], "drive.n_crossing")
        try:
            h_d = resonant_drive(n, delta)
        except ValueError as exc:
            raise ConfigError("drive.n_crossing: %s" % exc) from None
    else:
        h_d = _as_float(drive["h_d_mhz"], "drive.h_d_mhz")

    if "h_i_mhz" in drive and "h_i_ratio" in drive:
        raise ConfigError("drive: give at most one of h_i_mhz or h_i_ratio")
    if "h_i_mhz" in drive:
        h_i = _as_float(drive["h_i_mhz"], "drive.h_i_mhz")
    elif "h_i_ratio" in drive:
        h_i = _as_float(drive["h_i_ratio"], "drive.h_i_ratio") * h_d
    else:
        h_i = 0.0

    f0 = _as_float(cfg.get("f0_mhz", 9600.0), "f0_mhz")
    phi = math.radians(_as_float(drive.get("phi_deg", 0.0), "drive.phi_deg"))
    theta = math.radians(_as_float(drive.get("theta_deg", 0.0), "drive.theta_deg"))
    try:
        return DriveConfig(f0=f0, delta=delta, h_d=h_d, h_i=h_i, phi=phi, theta=theta)
    except ValueError as exc:
        raise ConfigError("drive: %s" % exc) from None


def _build_ensemble(cfg: dict) -> Optional[EnsembleSpec]:
    ens = cfg.get("ensemble")
    if ens is None:
        return None
    ens = _as_map(ens, "ensemble")
    _check_keys(ens, _ENSEMBLE_KEYS, "ensemble")
    sigma = ens.get("sigma_mhz")
    if sigma is not None:
        sigma = _as_float(sigma, "ensemble.sigma_mhz")
        if sigma < 0:
            raise ConfigError("ensemble.sigma_mhz must be >= 0")
    n_nodes = ens.get("n_nodes")
    if n_nodes is not None:
        n_nodes = _as_int(n_nodes, "ensemble.n_nodes")
        if n_nodes < 1:
            raise ConfigError("ensemble.n_nodes must be >= 1")
    return EnsembleSpec(sigma_mhz=sigma, n_nodes=n_nodes)


def _build_segment(kind: str, body, path: str, tau_free_default: float):
    if kind == "prepare":
        axis = body if isinstance(body, str) else _as_map(body, path).get("axis", "+Z")
        if isinstance(body, dict):
            _check_keys(body, {"axis"}, path)
        return Prepare(axis=_as_str(axis, path + ".axis"))
    if kind == "burst":
        body = _as_map(body, path)
        _check_keys(body, _BURST_KEYS, path)
        if "duration_us" not in body:
            raise ConfigError("%s.duration_us is required" % path)
        return Burst(
            duration=_as_float(body["duration_us"], path + ".duration_us"),
            image_on=_as_bool(body.get("image_on", True), path + ".image_on"),
        )
    if kind == "wait":
        body = _as_map(body, path)
        _check_keys(body, {"duration_us"}, path)
        if "duration_us" not in body:
            raise ConfigError("%s.duration_us is required" % path)
        return Wait(duration=_as_float(body["duration_us"], path + ".duration_us"))
    if kind == "hard_pulse":
        body = _as_map(body, path)
        _check_keys(body, {"angle_deg", "axis"}, path)
        if "angle_deg" not in body:
            raise ConfigError("%s.angle_deg is required" % path)
        return HardPulse(
            angle=math.radians(_as_float(body["angle_deg"], path + ".angle_deg")),
            axis=_as_str(body.get("axis", "y"), path + ".axis"),
        )
    if kind == "acquire_echo":
        body = _as_map(body, path)
        _check_keys(body, {"tau_free_us", "readout"}, path)
        return AcquireEcho(
            tau_free=_as_float(body.get("tau_free_us", tau_free_default), path + ".tau_free_us"),
            readout=_as_str(body.get("readout", "+Z"), path + ".readout"),
        )
    if kind == "acquire_fid":
        body = _as_map(body, path)
        _check_keys(body, set(), path)
        return AcquireFID()
    raise ConfigError("unknown config key: %s" % path)


def _build_segments(cfg: dict, preset: Optional[str]) -> list:
    has_seq = "sequence" in cfg and cfg["sequence"] is not None
    has_burst = "burst" in cfg and cfg["burst"] is not None
    if has_seq and has_burst:
        raise ConfigError("give either sequence or burst, not both")
    tau_free_default = MATERIAL_INFO.get(preset, {}).get("tau_free_us", 0.3)

    if has_burst:
        body = _as_map(cfg["burst"], "burst")
        _check_keys(body, _BURST_KEYS, "burst")
        if "duration_us" not in body:
            raise ConfigError("burst.duration_us is required")
        seg = Burst(
            duration=_as_float(body["duration_us"], "burst.duration_us"),
            image_on=_as_bool(body.get("image_on", True), "burst.image_on"),
        )
        return [Prepare(axis="+Z"), seg]

    if not has_seq:
        raise ConfigError("config needs a sequence list or a burst block")
    seq = cfg["sequence"]
    if not isinstance(seq, list) or not seq:
        raise ConfigError("sequence must be a nonempty list")
    segments = []
    for i, item in enumerate(seq):
        path = "sequence[%d]" % i
        if not isinstance(item, dict) or len(item) != 1:
            raise ConfigError("%s must be a single-key mapping, e.g. {burst: {...}}" % path)
        (kind, body), = item.items()
        if kind not in _SEGMENT_KINDS:
            raise ConfigError("unknown config key: %s.%s" % (path, kind))
        try:
            segments.append(_build_segment(kind, body, "%s.%s" % (path, kind), tau_free_default))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("%s.%s: %s" % (path, kind, exc)) from None
    return segments


def _build_tls(cfg: dict, sys_: Optional[SpinSystem]) -> Optional[EffectiveTLS]:
    if sys_ is None or cfg.get("b0_mt") is None:
        return None
    b0 = _as_float(cfg["b0_mt"], "b0_mt")
    pair = cfg.get("level_pair", [0, 1])
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise ConfigError("level_pair must be a [lower, upper] pair of level indices")
    pair = tuple(_as_int(v, "level_pair") for v in pair)
    try:
        return reduce_to_tls(sys_, b0, pair)
    except ValueError as exc:
        raise ConfigError("level_pair: %s" % exc) from None


@dataclass
class Scenario:
    """Everything one run needs, resolved and validated from a config file."""

    drive: DriveConfig
    env: Environment
    segments: list
    tls: Optional[EffectiveTLS]
    ensemble: Optional[EnsembleSpec]
    out_dir: str
    basename: Optional[str]
    raw: dict


def load_scenario(path: str) -> Scenario:
    cfg = load_config(path)
    _check_keys(cfg, _TOP_KEYS, "")
    sys_, preset = _build_spin_system(cfg)
    out = _as_map(cfg.get("output"), "output")
    _check_keys(out, _OUTPUT_KEYS, "output")
    return Scenario(
        drive=_build_drive(cfg),
        env=_build_environment(cfg, preset),
        segments=_build_segments(cfg, preset),
        tls=_build_tls(cfg, sys_),
        ensemble=_build_ensemble(cfg),
        out_dir=_as_str(out.get("directory", "."), "output.directory"),
        basename=None if out.get("basename") is None else _as_str(out["basename"], "output.basename"),
        raw=cfg,
    )


# --------------------------------------------------------------------------
# deterministic output helpers

def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return "%.12g" % value


def _write_csv(path: str, header: Sequence, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_fmt(v) for v in header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _versions() -> Dict[str, str]:
    from . import __version__

    return {
        "drivenspin": __version__,
        "numpy": np.__version__,
        "python": "%d.%d.%d" % sys.version_info[:3],
        "scipy": scipy.__version__,
    }


def _write_manifest(out_dir: str, basename: str, command: str, scenario_raw, cli: dict, outputs, results) -> str:
    manifest = {
        "cli": cli,
        "command": command,
        "config": scenario_raw,
        "outputs": sorted(outputs),
        "results": results,
        "versions": _versions(),
    }
    path = os.path.join(out_dir, basename + "_manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _resolve_out(scn_dir: str, scn_base: Optional[str], args, default_base: str) -> Tuple[str, str]:
    out_dir = args.out_dir if args.out_dir is not None else scn_dir
    os.makedirs(out_dir, exist_ok=True)
    return out_dir, scn_base or default_base


def _first_burst(segments) -> Burst:
    for seg in segments:
        if isinstance(seg, Burst) and seg.duration > 0:
            return seg
    raise ConfigError("sequence contains no burst window to trace")


# --------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    scn = load_scenario(args.config)
    _first_burst(scn.segments)
    result = run_sequence(scn.segments, scn.drive, scn.env, scn.tls, ensemble=scn.ensemble)
    trace = result.trace
    out_dir, base = _resolve_out(scn.out_dir, scn.basename, args, "simulate")
    csv_path = os.path.join(out_dir, base + ".csv")
    _write_csv(csv_path, ("t_us", "sx", "sy", "sz"), zip(trace.t, trace.sx, trace.sy, trace.sz))

    results = {"n_rows": len(trace), "signal": result.signal}
    _write_manifest(
        out_dir, base, "simulate", scn.raw, {"config": args.config}, [os.path.basename(csv_path)], results
    )
    print("wrote %s (%d rows)" % (csv_path, len(trace)))
    if result.signal is not None:
        print("readout signal = %s" % _fmt(result.signal))
    return 0


# --------------------------------------------------------------------------
# sweep

class _SweepScenario:
    """One sweep row: swap the swept drive field in, run, resample.

    Rows are resampled onto a common time axis (the densest default grid
    over the swept values) because the native burst sampling tracks the
    Rabi and image periods and would otherwise differ row to row.  Kept
    picklable so process pools can ship it to workers.
    """

    def __init__(self, param: str, scn: Scenario, t_common: Optional[np.ndarray]):
        self.param = param
        self.scn = scn
        self.t_common = t_common

    def drive_for(self, value: float) -> DriveConfig:
        base = self.scn.drive
        fields = {
            "f0": base.f0,
            "delta": base.delta,
            "h_d": base.h_d,
            "h_i": base.h_i,
            "phi": base.phi,
            "theta": base.theta,
        }
        if self.param == "phi_deg":
            fields["phi"] = math.radians(value)
        elif self.param == "delta_mhz":
            fields["delta"] = value
        elif self.param == "h_d_mhz":
            fields["h_d"] = value
        elif self.param == "h_i_mhz":
            fields["h_i"] = value
        else:
            raise ValueError("unknown sweep parameter %r" % self.param)
        return DriveConfig(**fields)

    def __call__(self, value: float) -> TimeSeries:
        scn = self.scn
        result = run_sequence(scn.segments, self.drive_for(value), scn.env, scn.tls, ensemble=scn.ensemble)
        trace = result.trace
        if self.t_common is None:
            return trace
        comps = [CubicSpline(trace.t, comp)(self.t_common) for comp in (trace.sx, trace.sy, trace.sz)]
        vecs = np.stack(comps, axis=1)
        norms = np.linalg.norm(vecs, axis=1)
        over = norms > 0.5  # spline overshoot is unphysical; project back onto the ball
        if np.any(over):
            vecs[over] *= (0.5 / norms[over])[:, None]
        return TimeSeries(self.t_common, vecs[:, 0], vecs[:, 1], vecs[:, 2])


def cmd_sweep(args) -> int:
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    scn = load_scenario(args.config)
    burst = _first_burst(scn.segments)
    values = np.linspace(args.from_, args.to, args.steps)

    t_common = None
    if args.steps > 1:
        probe = _SweepScenario(args.param, scn, None)
        # densest native grid over the swept values keeps every row resolved
        grids = [default_time_grid(probe.drive_for(v), burst.duration) for v in values]
        t_common = max(grids, key=len)
    scenario = _SweepScenario(args.param, scn, t_common)

    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    if jobs > 1 and args.steps > 1:
        with multiprocessing.Pool(processes=min(jobs, args.steps)) as pool:
            time_grid, fft_grid = sweep(args.param, values, scenario, component=args.component, map_fn=pool.map)
    else:
        time_grid, fft_grid = sweep(args.param, values, scenario, component=args.component)

    for i, err in time_grid.row_errors:
        print("sweep row %d (%s = %s) failed: %s" % (i, args.param, _fmt(values[i]), err), file=sys.stderr)

    out_dir, base = _resolve_out(scn.out_dir, scn.basename, args, "sweep")
    outputs = []
    for grid, axis_label, suffix in ((time_grid, "t_us", "_grid"), (fft_grid, "f_mhz", "_fft")):
        path = os.path.join(out_dir, base + suffix + ".csv")
        header = [axis_label] + [_fmt(v) for v in grid.param_values]
        cols = grid.values.T  # CSV convention: rows follow the axis, columns the swept values
        _write_csv(path, header, (np.concatenate(([t], row)) for t, row in zip(grid.axis, cols)))
        outputs.append(os.path.basename(path))
        print("wrote %s (%d x %d)" % (path, cols.shape[0], cols.shape[1] + 1))

    results = {
        "component": args.component,
        "row_errors": ["row %d: %s" % (i, e) for i, e in time_grid.row_errors],
        "rows_failed": len(time_grid.row_errors),
        "rows_ok": int(args.steps - len(time_grid.row_errors)),
    }
    cli = {
        "config": args.config,
        "from": args.from_,
        "jobs": jobs,
        "param": args.param,
        "steps": args.steps,
        "to": args.to,
    }
    _write_manifest(out_dir, base, "sweep", scn.raw, cli, outputs, results)
    return 0


# --------------------------------------------------------------------------
# floquet

def cmd_floquet(args) -> int:
    scn = load_scenario(args.config)
    drive = scn.drive
    if drive.delta == 0:
        raise ConfigError("drive.delta_mhz must be nonzero for quasi-energy analysis")
    try:
        spec = FloquetSpec(
            delta=drive.delta,
            h_d=drive.h_d,
            h_i=drive.h_i,
            phi=drive.phi,
            theta=drive.theta,
            n_blocks=args.n_blocks,
        )
    except ValueError as exc:
        raise ConfigError("--n-blocks: %s" % exc) from None
    spectrum = quasi_energies(spec)
    if drive.h_i == 0:
        # no image tone, no avoided crossing: report the exact zero rather
        # than eigensolver round-off
        measured = 0.0
        reduced = 0.0
    else:
        measured = spectrum.splitting_at_resonance
        reduced = crossing_block_splitting(drive.delta, drive.h_d, drive.h_i, drive.phi, drive.theta)
    e_plus, e_minus, closed = perturbative_splitting(drive.delta, drive.h_d, drive.h_i)

    rows: List[Tuple[str, float]] = [
        ("quasi_energy_%02d" % k, e) for k, e in enumerate(spectrum.quasi_energies)
    ]
    rows += [
        ("splitting_at_resonance", measured),
        ("splitting_crossing_block", reduced),
        ("splitting_closed_form", closed),
        ("e_plus_closed_form", e_plus),
        ("e_minus_closed_form", e_minus),
    ]

    out_dir, base = _resolve_out(scn.out_dir, scn.basename, args, "floquet")
    # suffixed so a shared basename never clobbers the simulate trace
    path = os.path.join(out_dir, base + "_quasi_energies.csv")
    _write_csv(path, ("quantity", "value_mhz"), rows)

    f_rabi = rabi_frequency(drive.delta, drive.h_d)
    print("wrote %s" % path)
    print("F_R = %s MHz (F_R/Delta = %s), n_blocks = %d" % (_fmt(f_rabi), _fmt(f_rabi / drive.delta), args.n_blocks))
    print("splitting (MHz): ladder %s | crossing block %s | closed form %s" % (_fmt(measured), _fmt(reduced), _fmt(closed)))

    results = {
        "e_minus_closed_form": e_minus,
        "e_plus_closed_form": e_plus,
        "splitting_at_resonance": measured,
        "splitting_closed_form": closed,
        "splitting_crossing_block": reduced,
    }
    _write_manifest(
        out_dir, base, "floquet", scn.raw, {"config": args.config, "n_blocks": args.n_blocks}, [os.path.basename(path)], results
    )
    return 0


# --------------------------------------------------------------------------
# fit

def cmd_fit(args) -> int:
    try:
        table = np.genfromtxt(args.csv, delimiter=",", names=True)
    except OSError:
        raise ConfigError("trace file not found: %s" % args.csv) from None
    names = table.dtype.names or ()
    if "t_us" not in names:
        raise ConfigError("%s: missing t_us column (need a simulate-format CSV)" % args.csv)
    if args.column not in names:
        raise ConfigError("%s: missing %s column" % (args.csv, args.column))
    t = np.atleast_1d(table["t_us"])
    y = np.atleast_1d(table[args.column])

    T, params, residual = fit_exp_decay(t, y, model=args.model)
    payload = {
        "T_us": T,
        "column": args.column,
        "model": args.model,
        "n_rows": int(t.size),
        "params": params,
        "residual_norm": residual,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    return 0


# --------------------------------------------------------------------------
# materials

def cmd_materials(args) -> int:
    header = ("name", "S", "g", "I", "t1_us", "t2_us", "tau_wait_us", "tau_free_us")
    print("%-9s %-4s %-7s %-4s %-6s %-6s %-12s %-11s" % header)
    for name in material_names():
        # cubic_a only shifts Mn level positions, not the listed constants
        sys_ = material(name, cubic_a=0.0) if name == "MnMgO" else material(name)
        info = MATERIAL_INFO[name]
        t1 = "-" if info["t1_us"] is None else _fmt(info["t1_us"])
        print(
            "%-9s %-4s %-7s %-4s %-6s %-6s %-12s %-11s"
            % (name, _fmt(sys_.S), _fmt(sys_.g), _fmt(sys_.I), t1, _fmt(info["t2_us"]), _fmt(info["tau_wait_us"]), _fmt(info["tau_free_us"]))
        )
    print()
    print("t1_us '-': not part of the preset; bursts there are T2-limited.")
    print("MnMgO needs cubic_a_mhz in the config (no published default).")
    return 0


# --------------------------------------------------------------------------
# entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drivenspin",
        description="Simulate and analyze coherence-protected Rabi oscillations of driven spins.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out_dir(p):
        p.add_argument("--out-dir", default=None, help="output directory (default: config output.directory or '.')")

    p_sim = sub.add_parser("simulate", help="run one scenario; write the burst trace CSV")
    p_sim.add_argument("config", help="YAML scenario file")
    add_out_dir(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_swp = sub.add_parser("sweep", help="repeat the scenario over one drive parameter; write grid + FFT CSVs")
    p_swp.add_argument("config", help="YAML scenario file")
    p_swp.add_argument("--param", required=True, choices=SWEEPABLE, help="drive field to sweep")
    p_swp.add_argument("--from", dest="from_", type=float, required=True, help="first swept value")
    p_swp.add_argument("--to", type=float, required=True, help="last swept value")
    p_swp.add_argument("--steps", type=int, required=True, help="number of grid points (>= 1)")
    p_swp.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    p_swp.add_argument("--component", default="sz", choices=("sx", "sy", "sz"), help="trace component for the FFT grid")
    add_out_dir(p_swp)
    p_swp.set_defaults(func=cmd_sweep)

    p_flq = sub.add_parser("floquet", help="quasi-energy table with measured and closed-form splittings")
    p_flq.add_argument("config", help="YAML scenario file")
    p_flq.add_argument("--n-blocks", type=int, default=7, help="Fourier blocks kept in the quasi-energy matrix")
    add_out_dir(p_flq)
    p_flq.set_defaults(func=cmd_floquet)

    p_fit = sub.add_parser("fit", help="fit a decay law to a simulate-format CSV column")
    p_fit.add_argument("csv", help="CSV with t_us,sx,sy,sz columns")
    p_fit.add_argument("--model", default="damped_cos", choices=("plain_exp", "damped_cos"))
    p_fit.add_argument("--column", default="sz", choices=("sx", "sy", "sz"))
    p_fit.add_argument("--out", default=None, help="also write the fit JSON here")
    p_fit.set_defaults(func=cmd_fit)

    p_mat = sub.add_parser("materials", help="list material presets")
    p_mat.set_defaults(func=cmd_materials)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SequenceError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 3
    except FitFailure as exc:
        print("fit failed: %s" % exc, file=sys.stderr)
        if exc.best is not None:
            print("best so far: T = %s, params = %s" % (_fmt(exc.best[0]), exc.best[1]), file=sys.stderr)
        return 4
    except IntegrationError as exc:
        print("integration error: %s" % exc, file=sys.stderr)
        return 4
    except (RuntimeError, OSError, ValueError) as exc:
        print("runtime error: %s" % exc, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
