"""Command-line front end.

Every subcommand resolves its options into a flat parameter dict, runs, and
writes ``STEM.csv`` / ``STEM.json`` (and ``STEM.dat`` for Pauli tables) plus
``STEM.manifest.json``.  ``qcmap replay STEM.manifest.json --out NEW`` re-runs
from the recorded parameters; outputs are byte-identical on the same build
(only the manifest's wall time differs).

Exit codes: 0 success, 2 invalid input, 3 numerical failure.  Failures also
print a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import constants as K
from .bohm import LineGrid, box_eigenstate, fields_from_density, kinetic_in_q
from .chnc import (
    BARE,
    DIFFRACTION,
    QUADRATURE,
    USER,
    ClassicalMapConfig,
    default_lambda_grid,
    exc_coupling_integration,
    exclusion_hole_energy,
    pauli_potentials,
    solve_spin_resolved,
    write_spin_resolved_csv,
)
from .classicality import cat_comparison, classify
from .errors import ConvergenceError, CouplingSweepError, NumericalError, ValidationError
from .fermion import DOWN, UP, JelliumSpec, gr0_finite_t, opposite_spin_g0
from .grid import build_grid
from .hnc import HncControls
from .io import read_table, write_json, write_table
from .pauli import verify_pauli, write_pauli

log = logging.getLogger("qcmap")

OUTPUT_DIR_ENV = "QCMAP_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("ValidationError", message, EXIT_INVALID)
        sys.exit(EXIT_INVALID)


def _emit_error(kind, message, code, extra=None):
    payload = {"error": {"type": kind, "message": message, "exit_code": code}}
    if extra:
        payload["error"].update(extra)
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _jellium(p) -> JelliumSpec:
    spec = JelliumSpec(p["rs"], p["zeta"])
    t = p["temp_ratio"] * spec.fermi_energy(UP)
    return JelliumSpec(p["rs"], p["zeta"], t)


def _grid(p):
    return build_grid(p["grid_n"], p["rmax_rs"] * p["rs"])


def _check_temp_ratio(p):
    if not (p["temp_ratio"] >= 0 and math.isfinite(p["temp_ratio"])):
        raise ValidationError("--temp-ratio must be >= 0")


# ---------------------------------------------------------------- runners


def run_gr0(p, stem):
    _check_temp_ratio(p)
    spec = _jellium(p)
    grid = _grid(p)
    norm = p["normalization"]
    x = grid.r / spec.r_s
    names = ["r_over_rs", "g_same", "g_opposite"]
    cols = [x, gr0_finite_t(spec, grid, UP, norm).values,
            opposite_spin_g0(spec, grid, norm).values]
    if 0 < spec.zeta < 1:
        names.append("g_same_minority")
        cols.append(gr0_finite_t(spec, grid, DOWN, norm).values)
    meta = {"rs": p["rs"], "zeta": p["zeta"], "temp_ratio": p["temp_ratio"],
            "normalization": norm}
    write_table(f"{stem}.csv", names, cols, meta)
    return [f"{stem}.csv"], {}, grid.to_dict()


def run_pauli(p, stem):
    _check_temp_ratio(p)
    spec = _jellium(p)
    cfg = ClassicalMapConfig(p["rs"], p["zeta"], spec.temperature, USER, t_cf=1.0,
                             grid_n=p["grid_n"], rmax_rs=p["rmax_rs"])
    pots = pauli_potentials(cfg)
    grid = cfg.grid
    controls = HncControls(tol=p["tol"])
    files = [f"{stem}.dat", f"{stem}.csv"]
    write_pauli(pots[UP], files[0])
    zeros = np.zeros(grid.n_points)
    nan = np.full(grid.n_points, np.nan)
    write_table(files[1], ["r_over_rs", "beta_p_upup", "beta_p_updown", "beta_p_downdown"],
                [pots[UP].r_over_rs, pots[UP].beta_p.values, zeros,
                 pots[DOWN].beta_p.values if DOWN in pots else nan],
                {"rs": p["rs"], "zeta": p["zeta"], "temp_ratio": p["temp_ratio"]})
    diag = {"cap_value": {s: q.cap_value for s, q in pots.items()}}
    if p["verify"]:
        checks = {s: verify_pauli(q, spec, controls) for s, q in pots.items()}
        diag["verification"] = {
            s: {"rms_error": c.rms_error, "iterations": c.state.iterations,
                "residual": c.state.residual}
            for s, c in checks.items()
        }
    write_json(f"{stem}.json", {"params": p, "diagnostics": diag})
    files.append(f"{stem}.json")
    return files, diag, grid.to_dict()


def _map_config(p, spec) -> ClassicalMapConfig:
    controls = HncControls(mixing=p["mixing"], tol=p["tol"], max_iter=p["max_iter"])
    if p["t_cf_mode"] == USER:
        kw = {"t_cf_mode": USER, "t_cf": p["t_cf"]}
    else:
        kw = {"t_cf_mode": QUADRATURE, "t_q": p["t_q"]}
    return ClassicalMapConfig(
        p["rs"], p["zeta"], spec.temperature, coulomb_model=p["coulomb"],
        lambda_ee=p["lambda_ee"], lambda_grid=tuple(p["lambda_grid"]),
        grid_n=p["grid_n"], rmax_rs=p["rmax_rs"], controls=controls, **kw,
    )


def run_solve(p, stem):
    _check_temp_ratio(p)
    cfg = _map_config(p, _jellium(p))
    res = solve_spin_resolved(cfg, p["lambda"])
    write_spin_resolved_csv(res, cfg, f"{stem}.csv",
                            {"rs": p["rs"], "zeta": p["zeta"], "lambda": p["lambda"]})
    diag = {"iterations": res.iterations, "residual": res.residual,
            "contact_upup": res.contact("upup")}
    write_json(f"{stem}.json", {"params": p, "config": cfg.to_dict(), "diagnostics": diag})
    return [f"{stem}.csv", f"{stem}.json"], diag, cfg.grid.to_dict()


def run_exc(p, stem):
    _check_temp_ratio(p)
    cfg = _map_config(p, _jellium(p))
    res = exc_coupling_integration(cfg, workers=p["workers"])
    keys = ["lambda", "integrand", "hole_sum", "contact_upup", "iterations", "residual"]
    write_table(f"{stem}.csv", keys, [[row[k] for row in res.table] for k in keys],
                {"rs": p["rs"], "zeta": p["zeta"], "e_xc": res.e_xc})
    diag = {
        "e_xc": res.e_xc,
        "quadrature_error_estimate": res.quadrature_error,
        "exclusion_hole_energy": exclusion_hole_energy(cfg),
        "iterations": [row["iterations"] for row in res.table],
    }
    write_json(f"{stem}.json", {"params": p, "config": cfg.to_dict(),
                                "result": res.to_dict(), "diagnostics": diag})
    return [f"{stem}.csv", f"{stem}.json"], diag, cfg.grid.to_dict()


def run_bohm(p, stem):
    if p["mode"] == "box":
        grid = None
        if p["grid_n"] is not None:
            grid = LineGrid(p["grid_n"], 0.0, p["width"])
        fields = box_eigenstate(p["level"], p["width"], grid, p["mass"])
    else:
        meta, names, cols = read_table(p["input"])
        if "x" not in cols or "n" not in cols:
            raise ValidationError("density table needs columns 'x' and 'n'")
        x = cols["x"]
        grid = LineGrid(len(x), float(x[0]), float(x[-1]))
        if not np.allclose(x, grid.x, rtol=0, atol=1e-9 * max(1.0, np.ptp(x))):
            raise ValidationError("density table must be on a uniform grid")
        fields = fields_from_density(cols["n"], grid, cols.get("S"), p["mass"])
    write_table(f"{stem}.csv", ["x", "n", "R", "Q", "j"],
                [fields.grid.x, fields.density, fields.amplitude, fields.q, fields.current],
                {"mode": p["mode"]})
    diag = {"valid_points": int(np.sum(fields.valid)),
            "q_interior_mean": float(np.mean(fields.q[fields.valid]))}
    if p["mode"] == "box":
        diag["eigenvalue"] = (p["level"] * math.pi / p["width"]) ** 2 / (2.0 * p["mass"])
    if fields.phase is None or np.ptp(fields.phase) == 0:
        try:
            kc = kinetic_in_q(fields)
            diag["kinetic_check"] = {"integral_nQ": kc.integral_nq,
                                     "kinetic_energy": kc.kinetic_energy,
                                     "residual": kc.residual}
        except ValidationError as exc:
            diag["kinetic_check"] = {"skipped": str(exc)}
    write_json(f"{stem}.json", {"params": p, "diagnostics": diag})
    return [f"{stem}.csv", f"{stem}.json"], diag, {
        "n_points": fields.grid.n_points, "x_min": fields.grid.x_min,
        "x_max": fields.grid.x_max}


def run_classify(p, stem):
    if p["units"] == "si":
        mass, temp, length = p["mass"], p["temp"], p["length"]
    else:
        mass, temp, length = K.me_to_kg(p["mass"]), K.hartree_to_kelvin(p["temp"]), \
            K.bohr_to_m(p["length"])
    rep = classify(mass, temp, length, p["density"], p["zeta"], p["ke_multiplier"])
    out = {"params": p, "report": rep.to_dict()}
    if p["mass_kg_is_reference"]:
        out["reference_comparison"] = cat_comparison(mass, temp)
    write_json(f"{stem}.json", out)
    return [f"{stem}.json"], {"verdict": rep.verdict, "wavelength_m": rep.wavelength_m}, None


RUNNERS = {
    "gr0": run_gr0,
    "pauli": run_pauli,
    "solve": run_solve,
    "exc": run_exc,
    "bohm": run_bohm,
    "classify": run_classify,
}


def execute(subcommand: str, params: dict, stem) -> dict:
    """Run one subcommand with resolved parameters and write its manifest."""
    stem = str(stem)
    Path(stem).parent.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files, diag, grid = RUNNERS[subcommand](params, stem)
    manifest = {
        "subcommand": subcommand,
        "params": params,
        "version": __version__,
        "grid": grid,
        "diagnostics": diag,
        "outputs": [Path(f).name for f in files],
        "wall_time_s": time.perf_counter() - t0,
    }
    write_json(f"{stem}.manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------- parsing


def _add_grid(sp, n=2048, rmax=20.0):
    sp.add_argument("--grid-n", type=int, default=n)
    sp.add_argument("--rmax-rs", type=float, default=rmax)


def _add_map(sp, zeta=0.0):
    sp.add_argument("--rs", type=float, default=1.0)
    sp.add_argument("--zeta", type=float, default=zeta)
    sp.add_argument("--temp-ratio", type=float, default=0.0, help="physical T / E_F")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--t-cf", type=float, help="classical-fluid temperature (Hartree)")
    g.add_argument("--t-q", type=float,
                   help="quantum temperature (Hartree); T_cf = sqrt(T^2 + T_q^2). "
                        "Default when neither is given: T_q = 2 E_F/5")
    sp.add_argument("--coulomb", choices=[BARE, DIFFRACTION], default=BARE)
    sp.add_argument("--lambda-ee", type=float, default=None)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--mixing", type=float, default=0.5)
    sp.add_argument("--max-iter", type=int, default=2000)
    _add_grid(sp)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qcmap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    sp = sub.add_parser("gr0", help="ideal same/opposite-spin PDFs")
    sp.add_argument("--rs", type=float, default=1.0)
    sp.add_argument("--zeta", type=float, default=1.0)
    sp.add_argument("--temp-ratio", type=float, default=0.0)
    sp.add_argument("--normalization", choices=["unity", "half"], default="unity")
    _add_grid(sp)
    sp.add_argument("--out")

    sp = sub.add_parser("pauli", help="extract (and verify) the Pauli potential")
    sp.add_argument("--rs", type=float, default=1.0)
    sp.add_argument("--zeta", type=float, default=1.0)
    sp.add_argument("--temp-ratio", type=float, default=0.0)
    sp.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    _add_grid(sp)
    sp.add_argument("--out")

    sp = sub.add_parser("solve", help="spin-resolved PDFs of the classical map")
    _add_map(sp)
    sp.add_argument("--lambda", dest="coupling", type=float, default=1.0)
    sp.add_argument("--out")

    sp = sub.add_parser("exc", help="exchange-correlation energy by coupling integration")
    _add_map(sp)
    sp.add_argument("--lambda-points", type=int, default=9)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out")

    sp = sub.add_parser("bohm", help="Bohm quantum potential")
    bsub = sp.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    b = bsub.add_parser("box", help="infinite-well eigenstate")
    b.add_argument("--level", type=int, default=1)
    b.add_argument("--width", type=float, default=1.0)
    b.add_argument("--mass", type=float, default=1.0)
    b.add_argument("--grid-n", type=int, default=None)
    b.add_argument("--out")
    b = bsub.add_parser("density", help="density table with columns x,n[,S]")
    b.add_argument("--input", required=True)
    b.add_argument("--mass", type=float, default=1.0)
    b.add_argument("--out")

    sp = sub.add_parser("classify", help="thermal de Broglie wavelength and verdict")
    sp.add_argument("--units", choices=["si", "au"], default="si")
    sp.add_argument("--mass-kg", type=float)
    sp.add_argument("--temp-k", type=float)
    sp.add_argument("--length-m", type=float)
    sp.add_argument("--mass", type=float, help="electron masses (--units au)")
    sp.add_argument("--temp", type=float, help="Hartree (--units au)")
    sp.add_argument("--length", type=float, help="bohr (--units au)")
    sp.add_argument("--density", type=float, default=None, help="bohr^-3")
    sp.add_argument("--zeta", type=float, default=0.0)
    sp.add_argument("--ke-multiplier", type=float, default=1.0)
    sp.add_argument("--out")

    sp = sub.add_parser("replay", help="re-run a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out")
    return ap


def _resolve_map(a) -> dict:
    p = {
        "rs": a.rs, "zeta": a.zeta, "temp_ratio": a.temp_ratio,
        "coulomb": a.coulomb, "lambda_ee": a.lambda_ee, "tol": a.tol,
        "mixing": a.mixing, "max_iter": a.max_iter,
        "grid_n": a.grid_n, "rmax_rs": a.rmax_rs,
        "lambda_grid": list(default_lambda_grid()),
    }
    if a.t_cf is not None:
        p.update(t_cf_mode=USER, t_cf=a.t_cf, t_q=None)
    else:
        t_q = a.t_q
        if t_q is None:
            from .classicality import degeneracy_temperature
            spec = JelliumSpec(a.rs, a.zeta)
            t_q = degeneracy_temperature(spec.density, 1.0, a.zeta).t_q
        p.update(t_cf_mode=QUADRATURE, t_cf=None, t_q=t_q)
    return p


def resolve_params(a) -> tuple[str, dict]:
    sub = a.subcommand
    if sub == "gr0":
        p = {"rs": a.rs, "zeta": a.zeta, "temp_ratio": a.temp_ratio,
             "normalization": a.normalization, "grid_n": a.grid_n, "rmax_rs": a.rmax_rs}
    elif sub == "pauli":
        p = {"rs": a.rs, "zeta": a.zeta, "temp_ratio": a.temp_ratio, "verify": a.verify,
             "tol": a.tol, "grid_n": a.grid_n, "rmax_rs": a.rmax_rs}
    elif sub == "solve":
        p = _resolve_map(a)
        p["lambda"] = a.coupling
    elif sub == "exc":
        p = _resolve_map(a)
        if a.lambda_points < 5:
            raise ValidationError("--lambda-points must be >= 5")
        p["lambda_grid"] = list(default_lambda_grid(a.lambda_points))
        p["workers"] = a.workers
    elif sub == "bohm":
        if a.mode == "box":
            p = {"mode": "box", "level": a.level, "width": a.width, "mass": a.mass,
                 "grid_n": a.grid_n}
        else:
            p = {"mode": "density", "input": str(Path(a.input).resolve()), "mass": a.mass}
    elif sub == "classify":
        if a.units == "si":
            mass, temp = a.mass_kg, a.temp_k
            length = a.length_m if a.length_m is not None else K.PROTON_RADIUS
        else:
            mass, temp = a.mass, a.temp
            length = a.length if a.length is not None else K.m_to_bohr(K.PROTON_RADIUS)
        if mass is None or temp is None:
            raise ValidationError("classify needs a mass and a temperature for the chosen units")
        p = {"units": a.units, "mass": mass, "temp": temp, "length": length,
             "density": a.density, "zeta": a.zeta, "ke_multiplier": a.ke_multiplier,
             "mass_kg_is_reference": a.units == "si" and mass == 1.0}
    else:
        raise ValidationError(f"unknown subcommand {sub}")
    return sub, p


def _default_stem(name: str) -> str:
    return str(Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / name)


def _print_summary(sub, manifest):
    diag = manifest["diagnostics"]
    if sub == "classify":
        print(f"wavelength = {diag['wavelength_m']:.6e} m  verdict: {diag['verdict']}")
    else:
        print(json.dumps({"subcommand": sub, "outputs": manifest["outputs"],
                          "diagnostics": diag}, sort_keys=True, default=str))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.subcommand == "replay":
            man = json.loads(Path(args.manifest).read_text())
            sub, params = man["subcommand"], man["params"]
            stem = args.out or str(Path(args.manifest).with_suffix("")).removesuffix(
                ".manifest") + ".replay"
        else:
            sub, params = resolve_params(args)
            stem = args.out or _default_stem(sub)
        manifest = execute(sub, params, stem)
        _print_summary(sub, manifest)
        return EXIT_OK
    except ValidationError as exc:
        _emit_error("ValidationError", str(exc), EXIT_INVALID)
        return EXIT_INVALID
    except CouplingSweepError as exc:
        _emit_error("CouplingSweepError", str(exc), EXIT_NUMERICAL,
                    {"partial_table": exc.partial})
        return EXIT_NUMERICAL
    except ConvergenceError as exc:
        _emit_error(type(exc).__name__, str(exc), EXIT_NUMERICAL, exc.diagnostics())
        return EXIT_NUMERICAL
    except NumericalError as exc:
        _emit_error(type(exc).__name__, str(exc), EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        _emit_error(type(exc).__name__, str(exc), EXIT_INVALID)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
