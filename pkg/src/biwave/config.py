"""Flat key = value run configuration: parsing, validation, defaults.

Grammar: one `key = value` per line, blank lines and `#` comments ignored,
unknown keys rejected with their line number. Values are validated per
key; keys belonging to an initial-data family other than the configured
one are rejected by name.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParseError, ValidationError
from .geometry import make_manifold
from .grid import TWO_PI, Grid
from .integrator import SchemeConfig

_FAMILIES = ("traveling_wave", "bump", "random_bandlimited")

# key -> (converter, family or None for global)
_KEYS = {
    "dim": (int, None),
    "grid_size": (int, None),
    "length": (float, None),
    "manifold": (str, None),
    "tube_radius": (float, None),
    "scheme": (str, None),
    "dt": (float, None),
    "t_end": (float, None),
    "reproject_every": (int, None),
    "dealias_fraction": (float, None),
    "output_every": (float, None),
    "seed": (int, None),
    "csv_path": (str, None),
    "snapshot_path": (str, None),
    "initial": (str, None),
    "wave_k": (int, "traveling_wave"),
    "wave_omega": (float, "traveling_wave"),
    "wave_axes": (str, "traveling_wave"),
    "bump_amplitude": (float, "bump"),
    "bump_width": (float, "bump"),
    "bump_velocity": (float, "bump"),
    "bump_base": (str, "bump"),
    "bump_direction": (str, "bump"),
    "rb_kmax": (int, "random_bandlimited"),
    "rb_amplitude": (float, "random_bandlimited"),
    "rb_vel_amplitude": (float, "random_bandlimited"),
}

_REQUIRED = ("dim", "grid_size", "manifold", "dt", "t_end", "initial")


@dataclass(frozen=True)
class InitialData:
    family: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    dim: int
    grid_size: int
    manifold: object
    scheme: SchemeConfig
    t_end: float
    initial: InitialData
    length: float = TWO_PI
    output_every: float = None
    seed: int = 0
    csv_path: str = None
    snapshot_path: str = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValidationError("dim", "must be 1 or 2")
        if self.grid_size < 8 or self.grid_size % 2:
            raise ValidationError("grid_size", "must be even and >= 8")
        if not self.length > 0:
            raise ValidationError("length", "must be positive")
        if not self.t_end >= 0:
            raise ValidationError("t_end", "must be >= 0")
        if self.output_every is None:
            object.__setattr__(self, "output_every", 100.0 * self.scheme.dt)
        if self.output_every < self.scheme.dt:
            raise ValidationError("output_every", "must be >= dt")
        if self.initial.family not in _FAMILIES:
            raise ValidationError("initial", f"unknown family {self.initial.family!r}")

    @property
    def grid(self):
        return Grid(self.dim, self.grid_size, self.length)

    def with_updates(self, **kw):
        """Copy with updated top-level or scheme fields (dt, scheme, ...)."""
        scheme_kw = {k: kw.pop(k) for k in list(kw) if k in ("dt", "reproject_every", "dealias_fraction")}
        if "scheme" in kw and isinstance(kw["scheme"], str):
            scheme_kw["scheme"] = kw.pop("scheme")
        cfg = self
        if scheme_kw:
            cfg = replace(cfg, scheme=replace(cfg.scheme, **scheme_kw))
        if "output_every" not in kw and scheme_kw.get("dt"):
            kw.setdefault("output_every", max(self.output_every, scheme_kw["dt"]))
        return replace(cfg, **kw) if kw else cfg


def _parse_manifold(raw):
    kind, _, rest = raw.partition(":")
    kind = kind.strip().lower()
    try:
        params = [float(p) for p in rest.split(",")] if rest else []
        if kind == "sphere":
            if len(params) != 1:
                raise ValueError("sphere takes one parameter: sphere:L")
            return ("sphere", params)
        if kind == "torus":
            if len(params) != 2:
                raise ValueError("torus takes two parameters: torus:R,r")
            return ("torus", params)
    except ValueError as exc:
        raise ValidationError("manifold", str(exc)) from exc
    raise ValidationError("manifold", f"unknown kind {kind!r}")


def _parse_vector(raw, name):
    try:
        return np.array([float(p) for p in raw.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(name, "expected comma-separated floats") from exc


def parse_config(text):
    """Parse config text into a validated RunConfig with defaults filled."""
    raw = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(line_no, f"expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ParseError(line_no, f"unknown key {key!r}")
        if key in raw:
            raise ParseError(line_no, f"duplicate key {key!r}")
        conv, _family = _KEYS[key]
        try:
            raw[key] = conv(value)
        except ValueError as exc:
            raise ValidationError(key, f"bad value {value!r}") from exc
    return config_from_mapping(raw)


def config_from_mapping(raw):
    for key in _REQUIRED:
        if key not in raw:
            raise ValidationError(key, "missing required key")
    family = raw["initial"]
    if family not in _FAMILIES:
        raise ValidationError("initial", f"unknown family {family!r}")
    for key in raw:
        fam = _KEYS[key][1]
        if fam is not None and fam != family:
            raise ValidationError(key, f"only valid for initial = {fam}")

    kind, params = _parse_manifold(raw["manifold"])
    manifold = make_manifold(kind, *params, tube_radius=raw.get("tube_radius"))

    scheme_name = raw.get("scheme", "strang").lower()
    if scheme_name in ("strangsplit", "strang_split"):
        scheme_name = "strang"
    if scheme_name in ("rk4", "rk4_proj"):
        scheme_name = "rk4proj"
    scheme = SchemeConfig(
        scheme=scheme_name,
        dt=raw["dt"],
        reproject_every=raw.get("reproject_every", 1),
        dealias_fraction=raw.get("dealias_fraction", 2.0 / 3.0),
    )

    params = {}
    if family == "traveling_wave":
        params["k"] = raw.get("wave_k", 1)
        params["omega"] = raw.get("wave_omega", 1.0)
        axes_raw = raw.get("wave_axes", "0,1")
        try:
            axes = tuple(int(a) for a in axes_raw.split(","))
        except ValueError as exc:
            raise ValidationError("wave_axes", "expected two comma-separated ints") from exc
        if len(axes) != 2 or axes[0] == axes[1]:
            raise ValidationError("wave_axes", "expected two distinct axis indices")
        params["axes"] = axes
    elif family == "bump":
        params["amplitude"] = raw.get("bump_amplitude", 0.5)
        params["width"] = raw.get("bump_width", 0.8)
        params["velocity"] = raw.get("bump_velocity", 0.0)
        if params["width"] <= 0:
            raise ValidationError("bump_width", "must be positive")
        if "bump_base" in raw:
            params["base"] = _parse_vector(raw["bump_base"], "bump_base")
        if "bump_direction" in raw:
            params["direction"] = _parse_vector(raw["bump_direction"], "bump_direction")
    else:
        params["k_max"] = raw.get("rb_kmax", 2)
        params["amplitude"] = raw.get("rb_amplitude", 0.5)
        params["vel_amplitude"] = raw.get("rb_vel_amplitude", params["amplitude"])
        if params["k_max"] < 0:
            raise ValidationError("rb_kmax", "must be >= 0")

    cfg = RunConfig(
        dim=raw["dim"],
        grid_size=raw["grid_size"],
        manifold=manifold,
        scheme=scheme,
        t_end=raw["t_end"],
        initial=InitialData(family=family, params=params),
        length=raw.get("length", TWO_PI),
        output_every=raw.get("output_every"),
        seed=raw.get("seed", 0),
        csv_path=raw.get("csv_path"),
        snapshot_path=raw.get("snapshot_path"),
    )
    if family == "traveling_wave":
        from .geometry import Sphere

        if not isinstance(manifold, Sphere):
            raise ValidationError("initial", "traveling_wave requires a sphere manifold")
        if max(cfg.initial.params["axes"]) >= manifold.ambient_dim:
            raise ValidationError("wave_axes", "axis index exceeds ambient dimension")
        if not math.isclose(cfg.length, TWO_PI, rel_tol=1e-12):
            if (cfg.initial.params["k"] * cfg.length / TWO_PI) % 1 != 0:
                raise ValidationError("wave_k", "wave must be periodic on the box")
    return cfg
