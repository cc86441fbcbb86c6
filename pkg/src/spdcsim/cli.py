"""Command-line front end.

Commands
--------
pm-angle   phase-matching angle, walk-off, and indices for a config
jid        compute one joint distribution, write it, print its stats
stats      print the statistics JSON for one plane/axis (no files)
certify    near+far inference per axis -> EPR width-product report
sweep      parameter sweep -> CSV (stdout, and a file with --out)
camera     uncorrected + corrected camera-plane JPD files + slope report

Conventions: stdout carries only the requested data (JSON with sorted
keys, or CSV); diagnostics go to stderr.  Outputs are byte-reproducible
for identical config and version.  Exit codes: 0 success; 2 config
error (including wavelengths outside the dispersion data's validity);
3 resource exhaustion (grid memory budget, file-system failures);
4 numerical degeneracy (phase-matching solver failure, collapsed
distributions, evanescent grid corners).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

from spdcsim import __version__
from spdcsim.biphoton import EvanescentInputError, GridMemoryError
from spdcsim.camera import (
    camera_slices,
    corrected_jpd,
    slope_report,
    uncorrected_jpd,
)
from spdcsim.config import Built, ConfigError, RunConfig, load_config
from spdcsim.dispersion import (
    PhaseMatchingError,
    WavelengthRangeError,
    effective_index,
)
from spdcsim.io import write_matrix_binary, write_matrix_csv
from spdcsim.spectral import JointDistribution, far_field_jid, near_field_jid
from spdcsim.stats import (
    DegenerateDistributionError,
    moments,
    normalize,
    reid_inference,
    reid_product,
    ridge_slope,
)
from spdcsim.sweep import rows_to_csv, run_sweep

__all__ = ["main"]


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {}
    if getattr(args, "grid_n", None) is not None:
        overrides["grid_n"] = args.grid_n
    if getattr(args, "slices", None) is not None:
        overrides["n_slices"] = args.slices
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = str(args.out)
    if getattr(args, "format", None) is not None:
        overrides["out_formats"] = (args.format,)
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def _compute_jid(cfg: RunConfig, built: Built, plane: str, axis: str) -> JointDistribution:
    fn = far_field_jid if plane == "far" else near_field_jid
    return fn(
        axis,
        built.crystal,
        built.pump,
        built.wl,
        built.filt,
        n_slices=cfg.n_slices,
        grid=cfg.grid(built, axis),
        kernel=cfg.kernel,
        memory_budget_bytes=cfg.memory_budget_bytes,
    )


def _stats_payload(jid: JointDistribution) -> dict:
    table = normalize(jid)
    summary = reid_inference(moments(table))
    fit = ridge_slope(table)
    payload = summary.to_json_dict()
    payload.update(
        plane=jid.plane,
        axis=jid.axis,
        slope_principal_axis=fit.slope_principal_axis,
        slope_regression=fit.slope_regression,
        intercept=fit.intercept,
        isotropic=fit.isotropic,
    )
    return payload


def _write_matrix(
    directory: Path, stem: str, formats, axis_signal, axis_idler, intensity, meta
) -> list[str]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        path = directory / f"{stem}.{fmt}"
        if fmt == "csv":
            write_matrix_csv(path, axis_signal, axis_idler, intensity, meta=meta)
        elif fmt == "bin":
            write_matrix_binary(path, axis_signal, axis_idler, intensity)
        else:
            blob = {
                **meta,
                "axis_signal": [float(v) for v in axis_signal],
                "axis_idler": [float(v) for v in axis_idler],
                "intensity": [[float(v) for v in row] for row in intensity],
            }
            path.write_text(
                json.dumps(blob, sort_keys=True) + "\n", encoding="utf-8"
            )
        written.append(path.name)
    return written


def cmd_pm_angle(args: argparse.Namespace) -> int:
    cfg = _config(args)
    built = cfg.build()
    crystal, wl, sell = built.crystal, built.wl, built.sellmeier
    _emit(
        {
            "pump_nm": wl.pump_nm,
            "signal_nm": wl.signal_nm,
            "idler_nm": wl.idler_nm,
            "theta_p_rad": crystal.theta_p,
            "theta_p_deg": math.degrees(crystal.theta_p),
            "walkoff_rad": crystal.rho,
            "walkoff_deg": math.degrees(crystal.rho),
            "n_o_signal": sell.index_ordinary(wl.signal_nm),
            "n_o_idler": sell.index_ordinary(wl.idler_nm),
            "n_pump_effective": effective_index(sell, crystal.theta_p, wl.pump_nm),
            "crystal_length_m": crystal.length_m,
        }
    )
    return 0


def cmd_jid(args: argparse.Namespace) -> int:
    cfg = _config(args)
    built = cfg.build()
    jid = _compute_jid(cfg, built, args.plane, args.axis)
    payload = _stats_payload(jid)
    files = _write_matrix(
        Path(cfg.out_dir),
        f"jid_{args.plane}_{args.axis}",
        cfg.out_formats,
        jid.axis_signal,
        jid.axis_idler,
        jid.intensity,
        meta={"plane": jid.plane, "axis": jid.axis},
    )
    stats_path = Path(cfg.out_dir) / f"jid_{args.plane}_{args.axis}_stats.json"
    stats_path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    files.append(stats_path.name)
    _emit({**payload, "files": sorted(files)})
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    cfg = _config(args)
    built = cfg.build()
    jid = _compute_jid(cfg, built, args.plane, args.axis)
    _emit(_stats_payload(jid))
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    cfg = _config(args)
    built = cfg.build()
    axes = (args.axis,) if args.axis else cfg.axes
    per_axis = {}
    for axis in axes:
        near = reid_inference(moments(normalize(_compute_jid(cfg, built, "near", axis))))
        far = reid_inference(moments(normalize(_compute_jid(cfg, built, "far", axis))))
        report = reid_product(near, far)
        per_axis[axis] = {
            **report.to_json_dict(),
            "near": near.to_json_dict(),
            "far": far.to_json_dict(),
        }
    _emit(
        {
            "axes": per_axis,
            "certified_all": all(v["certified"] for v in per_axis.values()),
        }
    )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    cfg.build()  # surface config/physics errors before the long run
    fmt = cfg.out_formats[0]
    if fmt == "bin":
        raise ConfigError("output.formats: sweep output supports csv or json, not bin")
    rows = run_sweep(cfg.sweep_spec(), convergence_check=args.check_convergence)
    if fmt == "json":
        text = json.dumps([asdict(r) for r in rows], sort_keys=True, indent=2) + "\n"
        name = "sweep.json"
    else:
        text = rows_to_csv(rows)
        name = "sweep.csv"
    sys.stdout.write(text)
    if args.out is not None:
        directory = Path(cfg.out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / name).write_text(text, encoding="utf-8")
    return 0


def cmd_camera(args: argparse.Namespace) -> int:
    cfg = _config(args)
    built = cfg.build()
    axis = args.axis or "y"
    slices = camera_slices(
        axis,
        built.crystal,
        built.pump,
        built.wl,
        built.filt,
        cfg.focal_length_m,
        n_slices=cfg.n_slices,
        grid=cfg.grid(built, axis),
        kernel=cfg.kernel,
        magnification=cfg.magnification,
        memory_budget_bytes=cfg.memory_budget_bytes,
    )
    raw = uncorrected_jpd(slices)
    fixed = corrected_jpd(slices, shift_mode=cfg.shift_mode, pump=built.pump)
    files = []
    for tag, jpd in (("uncorrected", raw), ("corrected", fixed)):
        files += _write_matrix(
            Path(cfg.out_dir),
            f"camera_{tag}_{axis}",
            cfg.out_formats,
            jpd.y_signal,
            jpd.y_idler,
            jpd.intensity,
            meta={"plane": "camera", "axis": axis, "corrected": tag == "corrected"},
        )
    _emit(
        {
            "uncorrected": slope_report(raw),
            "corrected": slope_report(fixed),
            "shift_mode": cfg.shift_mode,
            "files": sorted(files),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdcsim",
        description="Transverse spatial correlations and EPR certification "
        "for collinear type-I down-conversion sources.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, axis=True, axis_default=None, plane=False, out=True):
        p.add_argument("--config", type=Path, default=None, help="YAML run config")
        p.add_argument("--grid-n", type=int, default=None, dest="grid_n",
                       help="override grid points per axis")
        p.add_argument("--slices", type=int, default=None,
                       help="override spectral slice count")
        if axis:
            p.add_argument("--axis", choices=("x", "y"), default=axis_default)
        if plane:
            p.add_argument("--plane", choices=("far", "near"), default="far")
        if out:
            p.add_argument("--out", type=Path, default=None, help="output directory")
            p.add_argument("--format", choices=("csv", "json", "bin"), default=None)

    p = sub.add_parser("pm-angle", help="phase-matching angle and indices")
    common(p, axis=False, out=False)
    p.set_defaults(func=cmd_pm_angle)

    p = sub.add_parser("jid", help="compute and write one joint distribution")
    common(p, axis_default="x", plane=True)
    p.set_defaults(func=cmd_jid)

    p = sub.add_parser("stats", help="statistics JSON for one plane/axis")
    common(p, axis_default="x", plane=True, out=False)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("certify", help="near+far EPR width-product report")
    common(p, out=False)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    common(p, axis=False)
    p.add_argument("--check-convergence", action="store_true",
                   help="re-run extreme values at doubled grid resolution")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("camera", help="camera-plane JPDs and slope report")
    common(p)
    p.set_defaults(func=cmd_camera)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, WavelengthRangeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (GridMemoryError, OSError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 3
    except (PhaseMatchingError, DegenerateDistributionError, EvanescentInputError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
