"""Command-line front end.

Subcommands cover the whole workflow: ``import`` foreign CSV layouts,
``simulate`` synthetic walks, ``single``/``dual`` trajectory
reconstruction, ``compare`` similarity metrics, and ``average`` path
merging. Exit codes: 0 success, 2 invalid input, 3 numerical divergence.
"""

import argparse
import contextlib
import json
import os
import sys

import numpy as np

from . import __version__
from .averaging import average_paths
from .config import load_config, load_gait_spec, load_mapping
from .dual import closure_error, mode_report, run_dual_pipeline, run_single_pipeline
from .errors import DivergenceError, InputError, ParseError, PdrnavError
from .ingest import HEADER, ImuLog, parse_log, write_log
from .metrics import Trajectory, dtw, frechet
from .sim import generate
from .svgplot import save_svg


@contextlib.contextmanager
def _stage(name):
    """Tag pipeline errors with the stage they came from."""
    try:
        yield
    except PdrnavError as exc:
        exc.stage = name
        raise


def write_trajectory(path, traj: Trajectory) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if traj.timestamps is not None:
            fh.write("t,x,y,z\n")
            for t, p in zip(traj.timestamps, traj.points):
                fh.write(f"{float(t)!r},{float(p[0])!r},{float(p[1])!r},{float(p[2])!r}\n")
        else:
            fh.write("x,y,z\n")
            for p in traj.points:
                fh.write(f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r}\n")


def read_trajectory(path) -> Trajectory:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None
    cols = [c.strip() for c in header.split(",")]
    if cols == ["t", "x", "y", "z"]:
        if data.shape[1] != 4:
            raise ParseError(f"{path}: expected 4 columns, found {data.shape[1]}")
        return Trajectory(points=data[:, 1:4], timestamps=data[:, 0])
    if cols == ["x", "y", "z"]:
        if data.shape[1] != 3:
            raise ParseError(f"{path}: expected 3 columns, found {data.shape[1]}")
        return Trajectory(points=data)
    raise ParseError(f"{path}: unrecognized trajectory header {header!r}")


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def cmd_import(args) -> int:
    with _stage("import"):
        mapping = load_mapping(args.mapping, args.set)
        try:
            raw = np.loadtxt(
                args.src,
                delimiter=mapping.delimiter,
                skiprows=1 if mapping.has_header else 0,
                ndmin=2,
            )
        except (OSError, ValueError) as exc:
            raise ParseError(f"{args.src}: {exc}") from None
        cols = mapping.columns()
        if raw.shape[1] <= max(cols):
            raise ParseError(
                f"{args.src}: mapping expects column {max(cols)} but file has {raw.shape[1]} columns"
            )
        t = raw[:, mapping.col_t] * mapping.time_scale
        f = raw[:, [mapping.col_fx, mapping.col_fy, mapping.col_fz]] * mapping.acc_scale
        w = raw[:, [mapping.col_wx, mapping.col_wy, mapping.col_wz]] * mapping.gyro_scale
        log = ImuLog(t, f, w, source=str(args.src))
        write_log(log, args.dst)
    print(f"imported {len(log)} samples -> {args.dst}")
    return 0


def cmd_simulate(args) -> int:
    with _stage("simulate"):
        spec = load_gait_spec(args.spec, args.set)
        log1, log2, truth = generate(spec)
        out = _ensure_dir(args.out)
        write_log(log1, os.path.join(out, "leg1.csv"))
        write_log(log2, os.path.join(out, "leg2.csv"))
        write_trajectory(os.path.join(out, "truth_leg1.csv"), truth.trajectory(1))
        write_trajectory(os.path.join(out, "truth_leg2.csv"), truth.trajectory(2))
    print(f"simulated {len(log1)} samples per leg ({truth.t[-1]:.1f} s) -> {out}")
    return 0


def cmd_single(args) -> int:
    with _stage("ingest"):
        cfg = load_config(args.config, args.set)
        log = parse_log(args.log, cfg.ingest())
    with _stage("reconstruct"):
        run = run_single_pipeline(
            log,
            detector=cfg.detector(),
            mats=cfg.matrices(),
            gravity=cfg.gravity(),
            ingest_cfg=cfg.ingest(),
            closure=not args.no_closure,
        )
    with _stage("report"):
        out = _ensure_dir(args.out)
        traj = run.trajectory
        write_trajectory(os.path.join(out, "trajectory.csv"), traj)
        summary = {
            "closure": run.closure,
            "closure_residual_m": closure_error(traj),
            "duration_s": float(log.duration),
            "path_length_m": traj.path_length(),
            "samples": len(log),
            "source": os.path.basename(str(args.log)),
            "stance_fraction": float(np.mean(run.mask)),
        }
        _write_json(os.path.join(out, "summary.json"), summary)
        save_svg(os.path.join(out, "plot.svg"), [("trajectory", traj.points)],
                 title="reconstructed walk (top view)")
    print(f"closure residual {summary['closure_residual_m']:.3f} m, "
          f"path length {summary['path_length_m']:.1f} m -> {out}")
    return 0


def cmd_dual(args) -> int:
    with _stage("ingest"):
        cfg = load_config(args.config, args.set)
        log1 = parse_log(args.log1, cfg.ingest())
        log2 = parse_log(args.log2, cfg.ingest())
    with _stage("reconstruct"):
        run = run_dual_pipeline(
            log1,
            log2,
            detector=cfg.detector(),
            mats=cfg.matrices(),
            gravity=cfg.gravity(),
            ingest_cfg=cfg.ingest(),
            band_frac=cfg.band_frac,
            align_grid_deg=cfg.align_grid_deg,
            align_max_points=cfg.align_max_points,
            anchor=not args.no_anchor,
        )
        report = mode_report(run, grid_deg=cfg.align_grid_deg, max_points=cfg.align_max_points)
    with _stage("report"):
        out = _ensure_dir(args.out)
        write_trajectory(os.path.join(out, "leg1.csv"), run.fused1)
        write_trajectory(os.path.join(out, "leg2.csv"), run.fused2)
        write_trajectory(os.path.join(out, "combined.csv"), run.average)
        summary = {
            "band_samples": run.band,
            "dtw_legs_m": run.dtw_between_legs,
            "duration_s": float(max(log1.duration, log2.duration)),
            "first_leg": run.first_leg,
            "refine_yaw_deg": float(np.rad2deg(run.refine_yaw)),
            "report": {
                "fused_dtw_m": report["fused"],
                "no_closure_dtw_m": report["no_closure"],
                "single_dtw_m": report["single"],
            },
            "yaw_offset_deg": float(np.rad2deg(run.yaw_offset)),
        }
        _write_json(os.path.join(out, "summary.json"), summary)
        save_svg(
            os.path.join(out, "plot.svg"),
            [("leg 1", run.fused1.points), ("leg 2", run.fused2.points),
             ("combined", run.average.points)],
            title="dual-sensor walk (top view)",
        )
    print(f"inter-leg dtw {run.dtw_between_legs:.3f} m "
          f"(no-closure {report['no_closure']:.3f}, single {report['single']:.3f}), "
          f"first leg {run.first_leg} -> {out}")
    return 0


def cmd_compare(args) -> int:
    with _stage("compare"):
        a = read_trajectory(args.a)
        b = read_trajectory(args.b)
        metric = dtw if args.metric == "dtw" else frechet
        match = metric(a, b, band=args.band)
        if args.pairs:
            with open(args.pairs, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("i,j\n")
                for i, j in match.pairs:
                    fh.write(f"{int(i)},{int(j)}\n")
    print(json.dumps({
        "band": args.band,
        "distance_m": match.distance,
        "metric": args.metric,
        "pairs": len(match.pairs),
    }, indent=2, sort_keys=True))
    return 0


def cmd_average(args) -> int:
    with _stage("average"):
        a = read_trajectory(args.a)
        b = read_trajectory(args.b)
        match = dtw(a, b, band=args.band)
        avg = average_paths(a.points, b.points, match)
        write_trajectory(args.out, avg)
    print(f"averaged {len(avg)} points -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdrnav",
        description="Foot-mounted-IMU pedestrian trajectory reconstruction.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import", help="convert a foreign CSV layout to the standard format")
    p.add_argument("src", help="source CSV file")
    p.add_argument("dst", help="destination CSV file (standard header: " + ",".join(HEADER) + ")")
    p.add_argument("--mapping", default=None, help="column-mapping key=value file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a mapping entry")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("simulate", help="generate a synthetic two-sensor walk")
    p.add_argument("out", help="output directory")
    p.add_argument("--spec", default=None, help="gait spec key=value file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a spec entry")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("single", help="reconstruct one sensor's trajectory")
    p.add_argument("log", help="IMU CSV log")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--config", default=None, help="pipeline config key=value file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry")
    p.add_argument("--no-closure", action="store_true",
                   help="skip the stand-still position observations (drift baseline)")
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("dual", help="reconstruct and fuse two sensors")
    p.add_argument("log1", help="first sensor's IMU CSV log")
    p.add_argument("log2", help="second sensor's IMU CSV log")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--config", default=None, help="pipeline config key=value file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry")
    p.add_argument("--no-anchor", action="store_true",
                   help="disable the inter-sensor mid-swing observations")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("compare", help="similarity between two trajectory CSVs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", choices=("dtw", "frechet"), default="dtw")
    p.add_argument("--band", type=int, default=None, help="band half-width in samples")
    p.add_argument("--pairs", default=None, help="write the matched index pairs to this CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("average", help="average two trajectory CSVs into one path")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--band", type=int, default=None, help="band half-width in samples")
    p.add_argument("--out", default="average.csv", help="output CSV path")
    p.set_defaults(func=cmd_average)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        stage = getattr(exc, "stage", "input")
        print(f"error in stage '{stage}': {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        stage = getattr(exc, "stage", "filter")
        print(f"error in stage '{stage}': {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
