"""Command-line front end: ``solve``, ``sweep``, ``dispersion``, ``oracle-compare``.

Exit codes: 0 ok, 1 solver failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import functools
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import dispersion as disp
from .config import SWEEPABLE, ConfigError, RunConfig, dump_config, load_config, parse_config
from .dispersion import Model
from .errors import Ballistic1DError, UnsupportedProfileError
from .oracle import solve_piecewise_constant
from .potential import rtd_family, step_family
from .scattering import ScatteringSolution, iv_sweep, solve_scattering

log = logging.getLogger("ballistic1d")

SOLUTION_COLUMNS = (
    "x", "re_psi", "im_psi", "abs_psi", "re_dpsi", "im_dpsi",
    "re_d2psi", "im_d2psi", "re_d3psi", "im_d3psi", "j_local",
)
SWEEP_COLUMNS = ("v_l", "j", "current_rel_variation", "condition_estimate")
DISPERSION_COLUMNS = ("k", "E_parabolic", "E_quartic", "E_kane", "J_plane")
COMPARE_COLUMNS = ("x", "abs_psi_numeric", "abs_psi_oracle", "abs_diff")

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2


# output helpers ---------------------------------------------------------------


def write_csv(path, columns, data, precision=17):
    """Comma-separated, header row, LF endings, ``%.<precision>g`` values."""
    data = np.asarray(data, dtype=float).reshape(-1, len(columns))
    fmt = f"%.{precision}g"
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in data:
            fh.write(",".join(fmt % v for v in row) + "\n")


def write_meta(path, record):
    with open(path, "w", newline="\n") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def meta_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".meta.json")


def output_paths(base: Path, models):
    """One file per model; ``model=both`` appends ``_se2``/``_se4`` to the stem."""
    if len(models) == 1:
        return {models[0]: base}
    return {m: base.with_name(f"{base.stem}_{m.value}{base.suffix}") for m in models}


def _cplx(z):
    return None if z is None else [float(np.real(z)), float(np.imag(z))]


def _full_states(sol: ScatteringSolution, profile, mat):
    """``(Psi, Psi', Psi'', Psi''')`` rows; SE2 derivatives follow from the equation."""
    if sol.model is Model.SE4:
        return sol.states
    psi, dpsi = sol.states[:, 0], sol.states[:, 1]
    w = profile.eval(sol.x) + sol.energy
    slope = np.array([profile.segments[profile.segment_index(x)].coeff1 for x in sol.x])
    d2 = -w * psi / mat.b_coeff
    d3 = -(slope * psi + w * dpsi) / mat.b_coeff
    return np.stack([psi, dpsi, d2, d3], axis=1)


def solution_table(sol: ScatteringSolution, profile, mat):
    st = _full_states(sol, profile, mat)
    cols = [sol.x]
    for i in range(4):
        cols += [st[:, i].real, st[:, i].imag]
        if i == 0:
            cols.append(np.abs(st[:, 0]))
    cols.append(sol.j_local)
    return np.column_stack(cols)


def solution_meta(cfg: RunConfig, sol: ScatteringSolution):
    w, sc, d = sol.waves, sol.scattering, sol.diagnostics
    stats = sol.basis.stats
    return {
        "config": dump_config(cfg),
        "model": sol.model.value,
        "energy_ev": sol.energy,
        "current_nm_per_fs": sol.current,
        "wave_numbers": {"k1": w.k1, "k2": _cplx(w.k2), "k3": _cplx(w.k3), "k4": _cplx(w.k4)},
        "degenerate_injection": w.degenerate_injection,
        "degenerate_exit": w.degenerate_exit,
        "scattering": {
            "r1": _cplx(sc.r1), "r2": _cplx(sc.r2), "t1": _cplx(sc.t1), "t2": _cplx(sc.t2),
            "tau1": _cplx(sc.tau1), "tau2": _cplx(sc.tau2),
            "log_t1": _cplx(sc.log_t1), "log_t2": _cplx(sc.log_t2),
        },
        "coeffs": [_cplx(c) for c in sol.coeffs],
        "diagnostics": {
            "current_rel_variation": d.current_rel_variation,
            "boundary_residual_max": d.boundary_residual_max,
            "condition_estimate": d.condition_estimate,
            "backward_error": d.backward_error,
        },
        "solver_stats": None if stats is None else {
            "steps": stats.steps, "rejected": stats.rejected,
        },
    }


# commands -------------------------------------------------------------------------


def _require_k1(cfg):
    if cfg.k1 is None:
        raise ConfigError("injection.k1_nm_inv", "required field is missing")


def cmd_solve(cfg: RunConfig, out: Path):
    _require_k1(cfg)
    mat = cfg.material.params()
    profile = cfg.profile()
    sols = {m: solve_scattering(profile, cfg.k1, cfg.direction, mat, m, cfg.solver) for m in cfg.models}
    written = []
    for model, path in output_paths(out, cfg.models).items():
        sol = sols[model]
        write_csv(path, SOLUTION_COLUMNS, solution_table(sol, profile, mat), cfg.output.precision)
        write_meta(meta_path(path), solution_meta(cfg, sol))
        log.info("%s: J=%.10g, current_rel_variation=%.3g", model.value, sol.current,
                 sol.diagnostics.current_rel_variation)
        written.append(path)
    return written


def sweep_family(cfg: RunConfig):
    """Picklable ``v_l -> profile`` factory for the configured geometry."""
    kind = cfg.potential_kind
    if kind not in SWEEPABLE:
        raise ConfigError("potential.kind", f"sweeps need one of {', '.join(SWEEPABLE)}, got {kind!r}")
    geometry = {k: v for k, v in cfg.potential.items() if k not in ("kind", "v_l")}
    base = rtd_family if kind == "rtd" else step_family
    return functools.partial(base, **geometry)


def cmd_sweep(cfg: RunConfig, out: Path):
    _require_k1(cfg)
    if cfg.sweep is None:
        raise ConfigError("sweep", "required block is missing")
    family = sweep_family(cfg)
    mat = cfg.material.params()
    written = []
    for model, path in output_paths(out, cfg.models).items():
        res = iv_sweep(family, cfg.k1, mat, model, cfg.sweep.values(), cfg.solver,
                       cfg.direction, cfg.sweep.workers)
        rows = [(p.v_l, p.current, p.current_rel_variation, p.condition_estimate) for p in res.points]
        write_csv(path, SWEEP_COLUMNS, rows, cfg.output.precision)
        failures = [{"v_l": p.v_l, "error": p.error} for p in res.points if p.error]
        for f in failures:
            log.warning("%s: v_l=%g failed: %s", model.value, f["v_l"], f["error"])
        write_meta(meta_path(path), {"config": dump_config(cfg), "model": model.value,
                                     "k1": cfg.k1, "failures": failures})
        written.append(path)
    return written


def dispersion_table(k, mat):
    return np.column_stack([
        k, disp.parabolic_energy(k, mat), disp.quartic_energy(k, mat),
        disp.kane_energy(k, mat), disp.plane_wave_current(k, mat),
    ])


def cmd_dispersion(cfg: RunConfig, out: Path):
    mat = cfg.material.params()
    d = cfg.dispersion
    k_hi = d.k_max
    if k_hi is None:
        k_hi = mat.k_max if np.isfinite(mat.k_max) else 3.0
    if not 0.0 <= d.k_min < k_hi:
        raise ConfigError("dispersion", f"need 0 <= k_min < k_max, got [{d.k_min}, {k_hi}]")
    if k_hi > mat.k_max * (1 + 1e-12):
        raise ConfigError("dispersion.k_max", f"exceeds the zone edge k_max={mat.k_max:.10g}")
    k = np.linspace(d.k_min, min(k_hi, mat.k_max), d.n_points)
    write_csv(out, DISPERSION_COLUMNS, dispersion_table(k, mat), cfg.output.precision)
    write_meta(meta_path(out), {"config": dump_config(cfg), "k_max": mat.k_max, "e_max": mat.e_max,
                                "k_center": mat.k_center})
    return [out]


def cmd_oracle_compare(cfg: RunConfig, out: Path):
    _require_k1(cfg)
    profile = cfg.profile()
    if not profile.is_piecewise_constant:
        raise ConfigError("potential", "oracle-compare needs a piecewise-constant profile")
    mat = cfg.material.params()
    written = []
    for model, path in output_paths(out, cfg.models).items():
        num = solve_scattering(profile, cfg.k1, cfg.direction, mat, model, cfg.solver)
        ora = solve_piecewise_constant(profile, cfg.k1, cfg.direction, mat, model, cfg.solver.n_samples)
        diff = np.abs(num.abs_psi - ora.abs_psi)
        write_csv(path, COMPARE_COLUMNS, np.column_stack([num.x, num.abs_psi, ora.abs_psi, diff]),
                  cfg.output.precision)
        write_meta(meta_path(path), {"config": dump_config(cfg), "model": model.value,
                                     "max_abs_diff": float(diff.max())})
        log.info("%s: max |abs_psi difference| = %.3g", model.value, diff.max())
        written.append(path)
    return written


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "dispersion": cmd_dispersion,
    "oracle-compare": cmd_oracle_compare,
}


# published experiment configs -------------------------------------------------------


def experiment_configs():
    """Configs of the published experiments, keyed by file stem."""
    solver = {"rtol": 1e-10, "atol": 1e-12, "n_samples": 1000}

    def run(stem, potential, k1, **extra):
        cfg = {"model": "both", "potential": potential,
               "injection": {"k1_nm_inv": k1, "direction": "left_to_right"},
               "solver": dict(solver), "output": {"path": f"{stem}.csv", "precision": 17}}
        cfg.update(extra)
        return stem, cfg

    items = [
        run("step_vl_-0.1", {"kind": "step", "v_l": -0.1, "length": 135.0}, 0.4558),
        run("step_vl_0.3", {"kind": "step", "v_l": 0.3, "length": 135.0}, 0.4558),
        ("plane_wave_current", {"dispersion": {"k_min": 0.0, "n_points": 500},
                                "output": {"path": "plane_wave_current.csv", "precision": 17}}),
        run("single_barrier_k1_0.7264", {"kind": "single_barrier"}, 0.7264),
        run("single_barrier_k1_1.064", {"kind": "single_barrier"}, 1.064),
        run("double_barrier_k1_0.2846", {"kind": "double_barrier"}, 0.2846),
        run("double_barrier_k1_1.1386", {"kind": "double_barrier"}, 1.1386),
        run("rtd_vl_0.1", {"kind": "rtd", "v_l": 0.1}, 0.2846),
        run("rtd_iv_k1_0.2846", {"kind": "rtd"}, 0.2846,
            sweep={"v_start": 0.0, "v_end": 0.5, "n_points": 51}),
        run("rtd_iv_k1_0.1", {"kind": "rtd"}, 0.1,
            sweep={"v_start": 0.0, "v_end": 0.5, "n_points": 51}),
    ]
    return dict(items)


def write_experiment_configs(directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, data in experiment_configs().items():
        parse_config(data)  # shipped configs must validate
        path = directory / f"{stem}.yaml"
        with open(path, "w", newline="\n") as fh:
            yaml.safe_dump(data, fh, sort_keys=False)
        written.append(path)
    return written


# entry point ------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="ballistic1d",
                                description="Stationary 1-D ballistic transport with SE2 and SE4.")
    p.add_argument("--paper-figures", metavar="DIR",
                   help="write the configs of the published experiments into DIR")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "dispersion", help="YAML run configuration")
        sp.add_argument("--out", help="output CSV (default: output.path or <command>.csv)")
        sp.add_argument("--model", choices=["se2", "se4", "both"], help="override the config model")
    return p


def _load(args):
    cfg = load_config(args.config) if args.config else parse_config({})
    if args.model:
        cfg.model = args.model
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.paper_figures:
        for path in write_experiment_configs(args.paper_figures):
            print(path)
        if args.command is None:
            return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _load(args)
        out = Path(args.out or cfg.output.path or f"{args.command}.csv")
        written = COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedProfileError as exc:
        print(f"config error: potential: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Ballistic1DError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
