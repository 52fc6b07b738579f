"""Command-line front end: tune, compute, verify, bench, local-pressure,
simulate.

File formats.  Particle files are plain text, one particle per line
(``x y z q m``), preceded by a header ``cell Lx Ly Lz`` (orthorhombic) or
``cell3 h11 h21 h31 h12 h22 h32 h13 h23 h33`` (triclinic, column-major);
``#`` starts a comment.  Config files are flat ``key = value`` lines with
the same names as the long command-line flags; flags override the file.
All numeric output is printed with 17 significant digits, and every output
artifact embeds the fully resolved configuration.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 runtime or physics error.
"""

from __future__ import annotations

import argparse
import sys as _sys
import time
from pathlib import Path

import numpy as np

from .evaluate import (CoulombSolver, EwaldParameters, ParameterError,
                       evaluate_system)
from .kernel import KernelError, background_correction, self_energy
from .mesh import PlanningError, plan_grid
from .npt import NptConfig, SimulationError, integrate
from .oracle import (OracleError, classical_ewald, direct_ksum,
                     fd_force_check, fd_pressure_check, make_report,
                     relative_deviation, virial_audit)
from .pswf import PswfError, build_pswf, solve_bandwidth
from .realspace import RealspaceError, short_range
from .system import (Cell, CellError, GeometryError, ParticleSystem,
                     build_cell_list)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

FMT = "%.17g"


class InputError(Exception):
    """Malformed input file; message carries line/column diagnostics."""


def fnum(x) -> str:
    return FMT % float(x)


# ---------------------------------------------------------------------------
# particle files

def read_particles(path) -> ParticleSystem:
    lines = Path(path).read_text().splitlines()
    cell = None
    rows = []
    for ln, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        cols = text.split()
        if cell is None:
            if cols[0] == "cell":
                if len(cols) != 4:
                    raise InputError(f"{path}:{ln}: 'cell' header needs 3 "
                                     f"lengths, got {len(cols) - 1}")
                vals = _parse_floats(path, ln, cols[1:], offset=1)
                cell = Cell.orthorhombic(vals)
            elif cols[0] == "cell3":
                if len(cols) != 10:
                    raise InputError(f"{path}:{ln}: 'cell3' header needs 9 "
                                     f"entries, got {len(cols) - 1}")
                vals = _parse_floats(path, ln, cols[1:], offset=1)
                cell = Cell(h=np.array(vals).reshape(3, 3, order="F"))
            else:
                raise InputError(f"{path}:{ln}: expected 'cell' or 'cell3' "
                                 f"header, got {cols[0]!r}")
            continue
        if len(cols) != 5:
            raise InputError(f"{path}:{ln}: expected 5 columns "
                             f"(x y z q m), got {len(cols)}")
        rows.append(_parse_floats(path, ln, cols, offset=0))
    if cell is None:
        raise InputError(f"{path}: missing 'cell' header line")
    if not rows:
        raise InputError(f"{path}: no particle lines")
    arr = np.array(rows)
    try:
        return ParticleSystem(cell=cell, positions=arr[:, :3],
                              charges=arr[:, 3], masses=arr[:, 4])
    except CellError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _parse_floats(path, ln, cols, offset):
    out = []
    for col, tok in enumerate(cols, start=1 + offset):
        try:
            out.append(float(tok))
        except ValueError:
            raise InputError(f"{path}:{ln}:{col}: not a number: {tok!r}")
    return out


def write_particles(path, sys: ParticleSystem) -> None:
    lines = []
    if sys.cell.is_orthorhombic:
        L = np.diag(sys.cell.h)
        lines.append("cell " + " ".join(fnum(x) for x in L))
    else:
        flat = sys.cell.h.reshape(-1, order="F")
        lines.append("cell3 " + " ".join(fnum(x) for x in flat))
    for r, q, m in zip(sys.positions, sys.charges, sys.masses):
        lines.append(" ".join(fnum(v) for v in (*r, q, m)))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# config files

CONFIG_KEYS = {
    "delta_split": float, "delta_spread": float, "p_order": int,
    "r_c": float, "oversampling": float, "force_mode": str,
    "prefactor": float, "coupling": str, "seed": int, "threads": int,
    "dt": float, "n_steps": int, "target_t": float, "target_p0": float,
    "tau_p": float, "beta_t": float, "thermostat_period": int,
    "barostat": bool, "softcore_coeff": float, "record_every": int,
    "burn_in_fraction": float,
}


def _parse_bool(tok: str) -> bool:
    low = tok.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {tok!r}")


def read_config(path) -> dict:
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise InputError(f"{path}:{ln}: expected 'key = value'")
        key, val = (t.strip() for t in text.split("=", 1))
        if key not in CONFIG_KEYS:
            raise InputError(f"{path}:{ln}: unknown config key {key!r}")
        typ = CONFIG_KEYS[key]
        try:
            out[key] = _parse_bool(val) if typ is bool else typ(val)
        except ValueError as exc:
            raise InputError(f"{path}:{ln}: {exc}") from exc
    return out


def resolve_config(args) -> dict:
    """defaults < config file < explicit flags; deterministic."""
    cfg = {
        "delta_split": 1e-6, "delta_spread": None, "p_order": None,
        "r_c": None, "oversampling": 1.0, "force_mode": "ik",
        "prefactor": 1.0, "coupling": "isotropic", "seed": 0, "threads": 1,
        "dt": 2e-3, "n_steps": 1000, "target_t": 1.0, "target_p0": 0.0,
        "tau_p": 10.0, "beta_t": 0.05, "thermostat_period": 10,
        "barostat": True, "softcore_coeff": 1.0, "record_every": 10,
        "burn_in_fraction": 0.2,
    }
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    # Resolve dependent defaults exactly once, here.
    if cfg["delta_spread"] is None:
        cfg["delta_spread"] = cfg["delta_split"]
    if cfg["p_order"] is None:
        cfg["p_order"] = int(np.ceil(-np.log10(cfg["delta_split"]))) + 1
    return cfg


def config_header(cfg: dict, command: str) -> list:
    lines = [f"# prolate-ewald {command}",
             "# units: reduced; energies in prefactor*q^2/length, "
             "pressures in prefactor*q^2/length^4",
             f"# coulomb-prefactor {fnum(cfg['prefactor'])}"]
    for key in sorted(cfg):
        val = cfg[key]
        if isinstance(val, bool):
            txt = "true" if val else "false"
        elif isinstance(val, float):
            txt = fnum(val)
        else:
            txt = str(val)
        lines.append(f"# config {key} = {txt}")
    return lines


def ewald_params(cfg: dict, cell: Cell) -> EwaldParameters:
    r_c = cfg["r_c"]
    if r_c is None:
        r_c = 0.45 * float(np.min(cell.perpendicular_widths()))
    return EwaldParameters(r_c=float(r_c), delta_split=cfg["delta_split"],
                           delta_spread=cfg["delta_spread"], P=cfg["p_order"],
                           oversampling=cfg["oversampling"],
                           prefactor=cfg["prefactor"],
                           force_mode=cfg["force_mode"])


def _emit(lines, output):
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        _sys.stdout.write(text)


# ---------------------------------------------------------------------------
# tune

# Anchor table mapping target relative error to the splitting tolerance
# Delta, per quantity; intermediate targets interpolate between anchors in
# log-log space.  The anchors are read off the calibration sweep stored in
# data/tune_calibration.txt (regenerate with tools/calibrate_tune.py):
# achieved force error tracks Delta with a constant below one, while the
# pressure components need Delta about three times tighter than the target.
# The sweep uses static random configurations, so strongly structured
# systems may land a small factor above the target.
TUNE_ANCHORS = {
    "diag-pressure": [(1e-2, 1e-2 / 3), (1e-8, 1e-8 / 3)],
    "offdiag-pressure": [(1e-2, 1e-2 / 3), (1e-8, 1e-8 / 3)],
    "force": [(1e-2, 1e-2), (1e-8, 1e-8)],
}


class TuningError(Exception):
    pass


def tune_parameters(quantity: str, target: float) -> dict:
    if quantity not in TUNE_ANCHORS:
        raise TuningError(f"unknown quantity {quantity!r}; choose from "
                          f"{sorted(TUNE_ANCHORS)}")
    if not (1e-8 <= target <= 1e-2):
        raise TuningError(f"target error {target} outside [1e-8, 1e-2]")
    anchors = TUNE_ANCHORS[quantity]
    lx = np.log10([a[0] for a in anchors])
    ly = np.log10([a[1] for a in anchors])
    # Log-log interpolation through the anchors, linear extrapolation at
    # the ends with the boundary slope.
    t = np.log10(target)
    if t <= lx[-1]:
        slope = (ly[-1] - ly[-2]) / (lx[-1] - lx[-2])
        ld = ly[-1] + slope * (t - lx[-1])
    elif t >= lx[0]:
        slope = (ly[1] - ly[0]) / (lx[1] - lx[0])
        ld = ly[0] + slope * (t - lx[0])
    else:
        ld = np.interp(t, lx[::-1], ly[::-1])
    delta = float(10.0**ld)
    delta = min(max(delta, 1e-13), 9e-2)
    P = int(np.ceil(-np.log10(delta))) + 1
    c = solve_bandwidth(delta)
    return {"quantity": quantity, "target": target, "delta": delta,
            "c_split": c, "c_spread": c, "P": P}


def cmd_tune(args) -> int:
    cfg = resolve_config(args)
    params = tune_parameters(args.quantity, args.target)
    lines = config_header(cfg, "tune")
    lines.append(f"tune quantity {params['quantity']}")
    lines.append(f"tune target {fnum(params['target'])}")
    lines.append(f"tune delta {fnum(params['delta'])}")
    lines.append(f"tune c_split {fnum(params['c_split'])}")
    lines.append(f"tune c_spread {fnum(params['c_spread'])}")
    lines.append(f"tune P {params['P']}")
    if args.cell:
        lengths = [float(t) for t in args.cell.split(",")]
        if len(lengths) != 3:
            raise InputError("--cell needs Lx,Ly,Lz")
        cell = Cell.orthorhombic(lengths)
        r_c = cfg["r_c"] or 0.45 * min(lengths)
        basis = build_pswf(params["c_split"])
        from .kernel import SplitKernel
        kern = SplitKernel(basis=basis, r_c=r_c)
        spec = plan_grid(cell, kern, delta_spread=params["delta"],
                         P=params["P"], oversampling=cfg["oversampling"],
                         spread_basis=basis)
        lines.append(f"tune r_c {fnum(r_c)}")
        lines.append(f"tune grid {spec.M[0]} {spec.M[1]} {spec.M[2]}")
        lines.append("tune spacing " + " ".join(fnum(s) for s in spec.spacing))
    _emit(lines, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compute / local-pressure

def _compute_triclinic(sys: ParticleSystem, params: EwaldParameters):
    """Triclinic cells bypass the mesh: direct k-sum plus real-space pairs."""
    from .kernel import SplitKernel
    basis = build_pswf(solve_bandwidth(params.resolved()[0]))
    kern = SplitKernel(basis=basis, r_c=params.r_c)
    neighbors = build_cell_list(sys, params.r_c)
    sr = short_range(sys, kern, neighbors)
    e_far, f_far, p_far = direct_ksum(sys, kern)
    u_self = self_energy(kern, sys.charges)
    u_cb, u_bb, p_corr = background_correction(kern, sys.total_charge,
                                               sys.cell.volume)
    pref = params.prefactor
    terms = {"near": pref * sr.energy, "far": pref * e_far,
             "self": pref * u_self, "background": pref * (u_cb + u_bb)}
    forces = pref * (sr.forces + f_far)
    pressure = pref * (sr.pressure + p_far + p_corr)
    return terms, forces, pressure


def compute_lines(sys: ParticleSystem, cfg: dict) -> list:
    params = ewald_params(cfg, sys.cell)
    if sys.cell.is_orthorhombic:
        out = evaluate_system(sys, params)
        terms = {"near": out.u_near, "far": out.u_far, "self": out.u_self,
                 "background": out.u_background}
        forces, pressure = out.forces, out.pressure
    else:
        terms, forces, pressure = _compute_triclinic(sys, params)

    lines = []
    total = sum(terms.values())
    lines.append(f"energy total {fnum(total)}")
    for name in ("near", "far", "self", "background"):
        lines.append(f"energy {name} {fnum(terms[name])}")
    for a in range(3):
        lines.append("pressure " + "xyz"[a] + " "
                     + " ".join(fnum(v) for v in pressure[a]))
    for i, f in enumerate(forces):
        lines.append(f"force {i} " + " ".join(fnum(v) for v in f))
    return lines


def cmd_compute(args) -> int:
    cfg = resolve_config(args)
    sys = read_particles(args.input)
    lines = config_header(cfg, "compute") + compute_lines(sys, cfg)
    _emit(lines, args.output)
    return EXIT_OK


def cmd_local_pressure(args) -> int:
    cfg = resolve_config(args)
    sys = read_particles(args.input)
    if not sys.cell.is_orthorhombic:
        raise GeometryError("local-pressure requires an orthorhombic cell")
    params = ewald_params(cfg, sys.cell)
    solver = CoulombSolver(sys.cell, params)
    tensors = solver.local_pressure(sys)
    lines = config_header(cfg, "local-pressure")
    total = tensors.sum(axis=0)
    for a in range(3):
        lines.append("pressure-far " + "xyz"[a] + " "
                     + " ".join(fnum(v) for v in total[a]))
    for i, t in enumerate(tensors):
        flat = t[np.triu_indices(3)]
        lines.append(f"local {i} " + " ".join(fnum(v) for v in flat))
    _emit(lines, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def run_verification(sys: ParticleSystem, cfg: dict) -> list:
    """Oracle suite on one configuration; returns OracleReports."""
    params = ewald_params(cfg, sys.cell)
    delta = params.resolved()[0]
    reports = []

    if sys.cell.is_orthorhombic:
        out = evaluate_system(sys, params)
        energy = out.energy
        forces = out.forces
        pressure = out.pressure

        from .kernel import SplitKernel
        kern = CoulombSolver(sys.cell, params).kern
        e_d, f_d, p_d = direct_ksum(sys, kern)
        neighbors = build_cell_list(sys, params.r_c)
        sr = short_range(sys, kern, neighbors)
        u_self = self_energy(kern, sys.charges)
        u_cb, u_bb, p_corr = background_correction(kern, sys.total_charge,
                                                   sys.cell.volume)
        pref = params.prefactor
        e_ref = pref * (sr.energy + e_d + u_self + u_cb + u_bb)
        f_ref = pref * (sr.forces + f_d)
        p_ref = pref * (sr.pressure + p_d + p_corr)
        reports.append(make_report("energy vs direct k-sum", e_ref, energy, delta))
        # Force and pressure errors carry an O(1) constant over delta that
        # depends on the charge configuration (coherent lattices are worst),
        # so the audit checks order of magnitude rather than delta itself.
        reports.append(make_report("forces vs direct k-sum", f_ref, forces,
                                   max(10 * delta, 1e-9)))
        reports.append(make_report("pressure vs direct k-sum", p_ref, pressure,
                                   max(10 * delta, 1e-9)))
        reports.append(virial_audit(sys, pref * sr.pressure,
                                    pressure - pref * (sr.pressure + p_corr),
                                    out.u_near, out.u_far, out.u_self, delta))
    else:
        terms, forces, pressure = _compute_triclinic(sys, params)
        energy = sum(terms.values())

    e_cl, f_cl, p_cl = classical_ewald(sys, check=True)
    pref = params.prefactor
    # Energy agreement tracks delta with a small constant; force and
    # pressure errors carry an extra O(1) factor from the kernel tail
    # beyond r_c, so they are audited at the order-of-delta level.
    reports.append(make_report("energy vs classical Ewald", pref * e_cl,
                               energy, max(1e-9, delta)))
    reports.append(make_report("forces vs classical Ewald", pref * f_cl,
                               forces, max(1e-9, 10 * delta)))
    reports.append(make_report("pressure vs classical Ewald", pref * p_cl,
                               pressure, max(1e-9, 10 * delta)))
    return reports


def cmd_verify(args) -> int:
    cfg = resolve_config(args)
    sys = read_particles(args.input)
    reports = run_verification(sys, cfg)
    lines = config_header(cfg, "verify")
    for rep in reports:
        lines.append(f"report {'pass' if rep.passed else 'FAIL'} "
                     f"{rep.quantity!r} rel {fnum(rep.rel_deviation)} "
                     f"abs {fnum(rep.abs_deviation)} tol {fnum(rep.tolerance)}")
    ok = all(r.passed for r in reports)
    lines.append(f"verify {'pass' if ok else 'FAIL'} {len(reports)} checks")
    _emit(lines, args.output)
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


# ---------------------------------------------------------------------------
# bench

def _random_system(n: int, density: float, seed: int) -> ParticleSystem:
    rng = np.random.default_rng(seed)
    L = (n / density) ** (1.0 / 3.0)
    pos = rng.uniform(0.0, L, (n, 3))
    q = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    if n % 2:
        q = q - q.sum() / n
    return ParticleSystem(cell=Cell.orthorhombic([L, L, L]), positions=pos,
                          charges=q)


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    sizes = [int(t) for t in args.sizes.split(",")]
    lines = config_header(cfg, "bench")
    lines.append("bench-columns n wall_seconds grid_x grid_y grid_z")
    times, ns = [], []
    for n in sizes:
        sys = _random_system(n, args.density, cfg["seed"])
        params = ewald_params(cfg, sys.cell)
        solver = CoulombSolver(sys.cell, params)
        neighbors = build_cell_list(sys, params.r_c)
        solver.evaluate(sys, neighbors=neighbors)   # warm tables and plans
        t0 = time.perf_counter()
        for _ in range(args.repeats):
            neighbors = build_cell_list(sys, params.r_c)
            solver.evaluate(sys, neighbors=neighbors)
        wall = (time.perf_counter() - t0) / args.repeats
        lines.append(f"bench {n} {fnum(wall)} "
                     f"{solver.spec.M[0]} {solver.spec.M[1]} {solver.spec.M[2]}")
        times.append(wall)
        ns.append(n)
    if len(ns) >= 2:
        slope = np.polyfit(np.log(ns), np.log(times), 1)[0]
        lines.append(f"bench-slope {fnum(slope)}")
    _emit(lines, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    sys = read_particles(args.input)
    if not sys.cell.is_orthorhombic:
        raise GeometryError("simulate requires an orthorhombic cell")
    params = ewald_params(cfg, sys.cell)
    ncfg = NptConfig(dt=cfg["dt"], n_steps=cfg["n_steps"],
                     target_T=cfg["target_t"], target_P0=cfg["target_p0"],
                     tau_P=cfg["tau_p"], beta_T=cfg["beta_t"],
                     thermostat_period=cfg["thermostat_period"],
                     barostat=cfg["barostat"], seed=cfg["seed"],
                     ewald=params, softcore_coeff=cfg["softcore_coeff"],
                     record_every=cfg["record_every"],
                     burn_in_fraction=cfg["burn_in_fraction"])
    stats = integrate(ncfg, sys)
    lines = config_header(cfg, "simulate")
    lines.append("thermo-columns step T P_xx P_xy P_xz P_yy P_yz P_zz V "
                 "U_coulomb U_softcore kinetic enthalpy")
    for rec in stats.records:
        p = rec.pressure[np.triu_indices(3)]
        vals = [rec.temperature, *p, rec.volume, rec.u_coulomb,
                rec.u_softcore, rec.kinetic, rec.enthalpy]
        lines.append(f"thermo {rec.step} " + " ".join(fnum(v) for v in vals))
    lines.append(f"stat mean_pressure {fnum(stats.mean_pressure)}")
    lines.append(f"stat stderr_pressure {fnum(stats.stderr_pressure)}")
    lines.append(f"stat mean_volume {fnum(stats.mean_volume)}")
    lines.append(f"stat stderr_volume {fnum(stats.stderr_volume)}")
    lines.append(f"stat mean_temperature {fnum(stats.mean_temperature)}")
    lines.append(f"stat n_samples {stats.n_samples}")
    _emit(lines, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing

def _add_common(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--output", help="write records here instead of stdout")
    p.add_argument("--delta-split", dest="delta_split", type=float)
    p.add_argument("--delta-spread", dest="delta_spread", type=float)
    p.add_argument("--p-order", dest="p_order", type=int)
    p.add_argument("--r-c", dest="r_c", type=float)
    p.add_argument("--oversampling", dest="oversampling", type=float)
    p.add_argument("--force-mode", dest="force_mode",
                   choices=("ik", "analytic"))
    p.add_argument("--prefactor", dest="prefactor", type=float)
    p.add_argument("--seed", dest="seed", type=int)
    p.add_argument("--threads", dest="threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="prolate-ewald",
        description="Periodic electrostatics with prolate-window kernel "
                    "splitting: energies, forces, pressure tensors, NPT.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="map a target error to parameters")
    p.add_argument("--quantity", required=True,
                   choices=("diag-pressure", "offdiag-pressure", "force"))
    p.add_argument("--target", required=True, type=float)
    p.add_argument("--cell", help="Lx,Ly,Lz to also plan the grid")
    _add_common(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("compute", help="energy/forces/pressure for one file")
    p.add_argument("--input", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="oracle suite; nonzero exit on failure")
    p.add_argument("--input", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="timing vs N at fixed density")
    p.add_argument("--sizes", required=True, help="comma-separated N values")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--repeats", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("local-pressure", help="per-particle far-field tensors")
    p.add_argument("--input", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_local_pressure)

    p = sub.add_parser("simulate", help="NPT run on a particle file")
    p.add_argument("--input", required=True)
    p.add_argument("--dt", dest="dt", type=float)
    p.add_argument("--n-steps", dest="n_steps", type=int)
    p.add_argument("--target-t", dest="target_t", type=float)
    p.add_argument("--target-p0", dest="target_p0", type=float)
    p.add_argument("--tau-p", dest="tau_p", type=float)
    p.add_argument("--beta-t", dest="beta_t", type=float)
    p.add_argument("--thermostat-period", dest="thermostat_period", type=int)
    p.add_argument("--no-barostat", dest="barostat", action="store_false",
                   default=None)
    p.add_argument("--softcore-coeff", dest="softcore_coeff", type=float)
    p.add_argument("--record-every", dest="record_every", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)
    return ap


USAGE_ERRORS = (InputError, TuningError, ParameterError, OSError)
RUNTIME_ERRORS = (PlanningError, SimulationError, GeometryError, CellError,
                  KernelError, PswfError, RealspaceError, OracleError)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
