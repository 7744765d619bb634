"""Run configuration.

Every tunable default in the package lives in one flat dataclass that can
be loaded from a ``key = value`` text file and overridden from the command
line. The same file syntax (one assignment per line, ``#`` comments) is
reused for gait-simulation specs and for foreign-CSV import mappings.
"""

from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import InputError
from .filtering import FilterMatrices
from .ingest import IngestConfig
from .mechanization import GravityModel
from .sim import GaitSpec
from .zvd import ZuptDetector


def _parse_scalar(text: str, kind):
    text = text.strip()
    if kind is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise InputError(f"expected a boolean, got {text!r}")
    try:
        return kind(text)
    except ValueError:
        raise InputError(f"expected {kind.__name__}, got {text!r}") from None


def read_kv_file(path) -> dict:
    """Parse a flat ``key = value`` file into an ordered dict of strings."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


@dataclass
class PipelineConfig:
    # stance detection
    zupt_window: int = 5
    zupt_gamma: float = 300.0
    zupt_sigma_a: float = 0.02
    zupt_sigma_g: float = 0.002
    # process / measurement noise
    kf_sigma_a: float = 0.02
    kf_sigma_g: float = 0.002
    r_vel: float = 0.01
    r_still_pos: float = 0.01
    r_still_vel: float = 0.01
    r_anchor: float = 0.3
    p0_pos: float = 1e-3
    p0_vel: float = 1e-3
    p0_att: float = 0.01
    # ingest protocol
    gap_factor: float = 10.0
    min_rest_duration: float = 1.0
    # dual pipeline
    band_frac: float = 0.1
    align_grid_deg: float = 1.0
    align_max_points: int = 2000
    # environment
    gravity_mag: float = 9.81

    def detector(self) -> ZuptDetector:
        return ZuptDetector(
            window_len=self.zupt_window,
            gamma=self.zupt_gamma,
            sigma_a=self.zupt_sigma_a,
            sigma_g=self.zupt_sigma_g,
            gravity_mag=self.gravity_mag,
        )

    def matrices(self) -> FilterMatrices:
        return FilterMatrices.default(
            sigma_a=self.kf_sigma_a,
            sigma_g=self.kf_sigma_g,
            r_vel=self.r_vel,
            r_still_pos=self.r_still_pos,
            r_still_vel=self.r_still_vel,
            r_anchor=self.r_anchor,
            p0_pos=self.p0_pos,
            p0_vel=self.p0_vel,
            p0_att=self.p0_att,
        )

    def ingest(self) -> IngestConfig:
        return IngestConfig(gap_factor=self.gap_factor, min_rest_duration=self.min_rest_duration)

    def gravity(self) -> GravityModel:
        return GravityModel(g=np.array([0.0, 0.0, -self.gravity_mag]))


def _apply_kv(obj, data: dict, label: str):
    by_name = {f.name: f for f in fields(obj)}
    updates = {}
    for key, value in data.items():
        if key not in by_name:
            known = ", ".join(sorted(by_name))
            raise InputError(f"unknown {label} key {key!r} (known: {known})")
        kind = by_name[key].type
        kind = {"int": int, "float": float, "bool": bool, "str": str}.get(kind, kind)
        if not isinstance(kind, type):
            kind = float
        updates[key] = _parse_scalar(value, kind)
    return replace(obj, **updates)


def load_config(path=None, overrides=()) -> PipelineConfig:
    """Build a PipelineConfig from an optional file plus ``key=value`` overrides."""
    cfg = PipelineConfig()
    if path is not None:
        cfg = _apply_kv(cfg, read_kv_file(path), "config")
    if overrides:
        cfg = _apply_kv(cfg, _override_dict(overrides), "config")
    return cfg


def _override_dict(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise InputError(f"override must look like key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_route(text: str) -> np.ndarray:
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        comps = [c for c in chunk.replace(",", " ").split() if c]
        if len(comps) not in (2, 3):
            raise InputError(f"route waypoint must have 2 or 3 coordinates, got {chunk!r}")
        points.append([float(c) for c in comps])
    if len(points) < 2:
        raise InputError("route needs at least two waypoints")
    return np.array(points, dtype=float)


def load_gait_spec(path=None, overrides=()) -> GaitSpec:
    """Build a GaitSpec from an optional flat file plus overrides.

    Recognised keys are the GaitSpec fields; ``route`` uses the syntax
    ``x,y; x,y; ...`` and ``mount_yaw2_deg`` sets the second sensor's yaw
    mounting offset in degrees.
    """
    data = read_kv_file(path) if path is not None else {}
    data.update(_override_dict(overrides))

    kwargs = {}
    scalars = {
        "step_length": float,
        "swing_duration": float,
        "stance_duration": float,
        "sample_rate": float,
        "lateral_offset": float,
        "lift_height": float,
        "rest_duration": float,
        "sigma_a": float,
        "sigma_g": float,
        "bias_a": float,
        "bias_g": float,
        "seed": int,
        "closed_loop": bool,
    }
    for key, value in data.items():
        if key == "route":
            kwargs["route"] = _parse_route(value)
        elif key == "mount_yaw2_deg":
            kwargs["mount_yaw2"] = np.deg2rad(_parse_scalar(value, float))
        elif key in scalars:
            kwargs[key] = _parse_scalar(value, scalars[key])
        else:
            known = "route, mount_yaw2_deg, " + ", ".join(sorted(scalars))
            raise InputError(f"unknown simulation key {key!r} (known: {known})")
    return GaitSpec(**kwargs)


@dataclass
class ColumnMapping:
    """How to read a foreign CSV: column positions, units, layout."""

    delimiter: str = ","
    has_header: bool = True
    col_t: int = 0
    col_fx: int = 1
    col_fy: int = 2
    col_fz: int = 3
    col_wx: int = 4
    col_wy: int = 5
    col_wz: int = 6
    time_scale: float = 1.0
    acc_scale: float = 1.0
    gyro_scale: float = 1.0

    def columns(self):
        return [self.col_t, self.col_fx, self.col_fy, self.col_fz,
                self.col_wx, self.col_wy, self.col_wz]


def load_mapping(path=None, overrides=()) -> ColumnMapping:
    mapping = ColumnMapping()
    if path is not None:
        mapping = _apply_kv(mapping, read_kv_file(path), "mapping")
    if overrides:
        mapping = _apply_kv(mapping, _override_dict(overrides), "mapping")
    return mapping
