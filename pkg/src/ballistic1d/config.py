"""YAML run configuration with defaults and field-path error messages.

Schema (all blocks optional except ``injection.k1_nm_inv``)::

    model: se4                  # se2 | se4 | both
    material:
      m_star_rel: 0.067
      alpha_ev_inv: 0.242
      hbar_ev_fs: 0.6582
    potential:
      kind: step                # step | single_barrier | double_barrier | rtd | custom
      v_l: 0.3                  # remaining keys are the fields of the profile spec
      length: 135.0
    injection:
      k1_nm_inv: 0.4558
      direction: left_to_right  # or right_to_left
    solver: {rtol: 1.0e-10, atol: 1.0e-12, n_samples: 1000, max_steps: 1000000}
    sweep: {v_start: 0.0, v_end: 0.5, n_points: 51, workers: 1}
    dispersion: {k_min: 0.0, k_max: 2.69, n_points: 500}
    output: {path: out.csv, precision: 17}

A custom potential lists ``segments`` as ``[x_start, x_end, coeff0, coeff1]``
rows (``coeff1`` may be omitted).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .dispersion import Direction, Model
from .errors import InvalidParameterError
from .potential import Custom, DoubleBarrier, Rtd, Segment, SingleBarrier, Step, build_profile
from .propagator import SolverOpts
from .units import MaterialParams, derive_material

PROFILE_KINDS = {
    "step": Step,
    "single_barrier": SingleBarrier,
    "double_barrier": DoubleBarrier,
    "rtd": Rtd,
}
SWEEPABLE = ("step", "rtd")


class ConfigError(Exception):
    """Invalid configuration; ``path`` is the dotted field, ``line`` 1-based."""

    def __init__(self, path, message, line=None):
        self.path = path
        self.line = line
        where = path or "<root>"
        if line is not None:
            where = f"{where} (line {line})"
        super().__init__(f"{where}: {message}")


@dataclass
class MaterialConfig:
    m_star_rel: float = 0.067
    alpha_ev_inv: float = 0.242
    hbar_ev_fs: float = 0.6582

    def params(self) -> MaterialParams:
        return derive_material(self.m_star_rel, self.alpha_ev_inv, self.hbar_ev_fs)


@dataclass
class SweepConfig:
    v_start: float = 0.0
    v_end: float = 0.5
    n_points: int = 51
    workers: int = 1

    def values(self):
        if self.n_points == 1:
            return [self.v_start]
        step = (self.v_end - self.v_start) / (self.n_points - 1)
        return [self.v_start + i * step for i in range(self.n_points)]


@dataclass
class DispersionConfig:
    k_min: float = 0.0
    k_max: float | None = None  # defaults to the zone edge (or 3 nm^-1 when alpha = 0)
    n_points: int = 500


@dataclass
class OutputConfig:
    path: str | None = None
    precision: int = 17


@dataclass
class RunConfig:
    model: str = "se4"
    material: MaterialConfig = field(default_factory=MaterialConfig)
    potential: dict = field(default_factory=lambda: {"kind": "step", "v_l": 0.3})
    k1: float | None = None
    direction: Direction = Direction.LEFT_TO_RIGHT
    solver: SolverOpts = field(default_factory=SolverOpts)
    sweep: SweepConfig | None = None
    dispersion: DispersionConfig = field(default_factory=DispersionConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source: dict = field(default_factory=dict, repr=False)

    @property
    def models(self):
        return [Model.SE2, Model.SE4] if self.model == "both" else [Model(self.model)]

    @property
    def potential_kind(self):
        return self.potential["kind"]

    def profile_spec(self, v_l=None):
        kind = self.potential["kind"]
        fields = {k: v for k, v in self.potential.items() if k != "kind"}
        if kind == "custom":
            segs = tuple(Segment(*row) for row in fields["segments"])
            return Custom(segs, fields.get("length"))
        if v_l is not None:
            fields["v_l"] = v_l
        return PROFILE_KINDS[kind](**fields)

    def profile(self, v_l=None):
        return build_profile(self.profile_spec(v_l))


# parsing ----------------------------------------------------------------------


def _line_index(node, prefix="", out=None):
    """Map dotted paths to 1-based source lines from a composed YAML tree."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            path = f"{prefix}.{key.value}" if prefix else str(key.value)
            out[path] = key.start_mark.line + 1
            _line_index(value, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            path = f"{prefix}[{i}]"
            out[path] = item.start_mark.line + 1
            _line_index(item, path, out)
    return out


class _Reader:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, message):
        # fall back to the closest enclosing field that has a line
        probe = path
        while probe and probe not in self.lines:
            probe = probe.rpartition(".")[0]
        raise ConfigError(path, message, self.lines.get(probe))

    def block(self, data, path):
        if data is None:
            return {}
        if not isinstance(data, dict):
            self.fail(path, f"expected a mapping, got {type(data).__name__}")
        return data

    def number(self, data, key, path, default=None, required=False):
        full = f"{path}.{key}" if path else key
        if key not in data or data[key] is None:
            if required:
                self.fail(full, "required field is missing")
            return default
        value = data[key]
        if isinstance(value, bool):
            self.fail(full, "expected a number, got a boolean")
        if isinstance(value, str):
            # YAML 1.1 reads exponents without a dot (1e-10) as strings
            try:
                value = float(value)
            except ValueError:
                self.fail(full, f"expected a number, got {value!r}")
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(full, f"expected a finite number, got {value!r}")
        return float(value)

    def integer(self, data, key, path, default=None, minimum=None):
        full = f"{path}.{key}" if path else key
        value = self.number(data, key, path, default)
        if value is None:
            return None
        if value != int(value):
            self.fail(full, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(full, f"must be >= {minimum}, got {int(value)}")
        return int(value)

    def choice(self, data, key, path, options, default):
        full = f"{path}.{key}" if path else key
        value = data.get(key, default)
        if value is None:
            value = default
        if not isinstance(value, str) or value.lower() not in options:
            self.fail(full, f"expected one of {', '.join(options)}, got {value!r}")
        return value.lower()

    def no_extra(self, data, allowed, path):
        for key in data:
            if key not in allowed:
                full = f"{path}.{key}" if path else str(key)
                self.fail(full, f"unknown field (allowed: {', '.join(sorted(allowed))})")


def _parse_potential(rd: _Reader, data):
    data = rd.block(data, "potential")
    if not data:
        return {"kind": "step", "v_l": 0.3}
    kind = rd.choice(data, "kind", "potential", [*PROFILE_KINDS, "custom"], None)
    out = {"kind": kind}
    if kind == "custom":
        rd.no_extra(data, {"kind", "segments", "length"}, "potential")
        rows = data.get("segments")
        if not isinstance(rows, list) or not rows:
            rd.fail("potential.segments", "expected a non-empty list of [x_start, x_end, coeff0, coeff1]")
        segs = []
        for i, row in enumerate(rows):
            path = f"potential.segments[{i}]"
            if not isinstance(row, list) or len(row) not in (3, 4):
                rd.fail(path, "expected [x_start, x_end, coeff0] or [x_start, x_end, coeff0, coeff1]")
            segs.append([rd.number(dict(enumerate(row)), j, path) for j in range(len(row))])
        out["segments"] = segs
        if "length" in data:
            out["length"] = rd.number(data, "length", "potential")
        return out
    names = {f.name for f in dataclasses.fields(PROFILE_KINDS[kind])}
    rd.no_extra(data, names | {"kind"}, "potential")
    for name in names:
        if name in data:
            out[name] = rd.number(data, name, "potential")
    if kind == "step" and "v_l" not in out:
        rd.fail("potential.v_l", "required field is missing")
    return out


def parse_config(data, lines=None) -> RunConfig:
    """Validate a ``yaml.safe_load`` result into a :class:`RunConfig`."""
    rd = _Reader(lines or {})
    root = rd.block(data, "")
    rd.no_extra(root, {"model", "material", "potential", "injection", "solver", "sweep",
                       "dispersion", "output"}, "")
    cfg = RunConfig(source=root)
    cfg.model = rd.choice(root, "model", "", ["se2", "se4", "both"], "se4")

    mat = rd.block(root.get("material"), "material")
    rd.no_extra(mat, {"m_star_rel", "alpha_ev_inv", "hbar_ev_fs"}, "material")
    cfg.material = MaterialConfig(
        rd.number(mat, "m_star_rel", "material", 0.067),
        rd.number(mat, "alpha_ev_inv", "material", 0.242),
        rd.number(mat, "hbar_ev_fs", "material", 0.6582),
    )
    try:
        params = cfg.material.params()
    except InvalidParameterError as exc:
        rd.fail("material", str(exc))

    cfg.potential = _parse_potential(rd, root.get("potential"))
    try:
        cfg.profile()
    except (InvalidParameterError, TypeError) as exc:
        rd.fail("potential", str(exc))

    inj = rd.block(root.get("injection"), "injection")
    rd.no_extra(inj, {"k1_nm_inv", "direction"}, "injection")
    cfg.k1 = rd.number(inj, "k1_nm_inv", "injection")
    cfg.direction = Direction(
        rd.choice(inj, "direction", "injection", [d.value for d in Direction], "left_to_right")
    )
    if cfg.k1 is not None:
        if cfg.k1 <= 0:
            rd.fail("injection.k1_nm_inv", f"must be positive, got {cfg.k1}")
        if cfg.model != "se2" and not cfg.k1 < params.k_max:
            rd.fail("injection.k1_nm_inv", f"must lie below k_max={params.k_max:.6g} for se4")

    sol = rd.block(root.get("solver"), "solver")
    rd.no_extra(sol, {"rtol", "atol", "n_samples", "max_steps"}, "solver")
    d = SolverOpts()
    cfg.solver = SolverOpts(
        rtol=rd.number(sol, "rtol", "solver", d.rtol),
        atol=rd.number(sol, "atol", "solver", d.atol),
        n_samples=rd.integer(sol, "n_samples", "solver", d.n_samples, minimum=2),
        max_steps=rd.integer(sol, "max_steps", "solver", d.max_steps, minimum=1),
    )
    for key in ("rtol", "atol"):
        if getattr(cfg.solver, key) <= 0:
            rd.fail(f"solver.{key}", "must be positive")

    if root.get("sweep") is not None:
        sw = rd.block(root["sweep"], "sweep")
        rd.no_extra(sw, {"v_start", "v_end", "n_points", "workers"}, "sweep")
        d = SweepConfig()
        cfg.sweep = SweepConfig(
            rd.number(sw, "v_start", "sweep", d.v_start),
            rd.number(sw, "v_end", "sweep", d.v_end),
            rd.integer(sw, "n_points", "sweep", d.n_points, minimum=1),
            rd.integer(sw, "workers", "sweep", d.workers, minimum=1),
        )

    disp = rd.block(root.get("dispersion"), "dispersion")
    rd.no_extra(disp, {"k_min", "k_max", "n_points"}, "dispersion")
    cfg.dispersion = DispersionConfig(
        rd.number(disp, "k_min", "dispersion", 0.0),
        rd.number(disp, "k_max", "dispersion", None),
        rd.integer(disp, "n_points", "dispersion", 500, minimum=2),
    )

    out = rd.block(root.get("output"), "output")
    rd.no_extra(out, {"path", "precision"}, "output")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        rd.fail("output.path", "expected a string")
    cfg.output = OutputConfig(path, rd.integer(out, "precision", "output", 17, minimum=1))
    if cfg.output.precision > 17:
        rd.fail("output.precision", "at most 17 significant digits")
    return cfg


def load_config(path) -> RunConfig:
    """Read and validate a YAML config file; raises :class:`ConfigError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError("", f"YAML syntax error: {exc.problem}", line) from None
    return parse_config(data, _line_index(node) if node is not None else {})


def dump_config(cfg: RunConfig) -> dict:
    """Plain-data echo of the effective configuration (defaults filled in)."""
    out = {
        "model": cfg.model,
        "material": dataclasses.asdict(cfg.material),
        "potential": cfg.potential,
        "injection": {"k1_nm_inv": cfg.k1, "direction": cfg.direction.value},
        "solver": {
            "rtol": cfg.solver.rtol, "atol": cfg.solver.atol,
            "n_samples": cfg.solver.n_samples, "max_steps": cfg.solver.max_steps,
        },
        "dispersion": dataclasses.asdict(cfg.dispersion),
        "output": dataclasses.asdict(cfg.output),
    }
    if cfg.sweep is not None:
        out["sweep"] = dataclasses.asdict(cfg.sweep)
    return out
