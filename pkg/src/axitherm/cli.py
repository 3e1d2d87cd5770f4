"""Command-line interface: scenario runs, verification, mesh and
post-processing utilities.

Subcommands: solve, verify, fit-materials, isoline, mesh. A JSON config
file can preload any option; command-line flags win over file values.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io as axio
from . import verification as ver
from .isoline import extract_isoline, isoline_csv
from .materials import build_hearth_materials
from .mechanical import (
    FRICTIONLESS_CONTACT,
    MechanicalBC,
    TRACTION_FREE,
    Traction,
    hydrostatic_bc,
    recover_stress,
    solve_mechanical,
)
from .mesh import BoundaryTag, hearth_mesh, load_mesh, save_mesh
from .thermal import ADIABATIC, NewtonConfig, Robin, ThermalBC, newton_solve

HEARTH_Y_MAX = 7.4


@dataclass
class RunConfig:
    scenario: str = "hearth"
    mesh_file: str | None = None
    target_h: float = 0.1
    newton_tol: float = 1e-4
    newton_max_iter: int = 25
    initial_guess: float = 300.0
    solver: str = "lu"
    output_dir: str = "out"
    isoline_levels: list = field(default_factory=list)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as f:
            data = json.load(f)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    def validate(self):
        if self.target_h <= 0:
            raise ValueError("target_h must be positive")
        if self.mesh_file is not None and not os.path.exists(self.mesh_file):
            raise ValueError(f"mesh file not found: {self.mesh_file}")
        if self.solver not in ("lu", "cg"):
            raise ValueError(f"unknown solver '{self.solver}'")
        if not all(np.isfinite(v) for v in self.isoline_levels):
            raise ValueError("isoline levels must be finite")


def hearth_thermal_bc() -> ThermalBC:
    return ThermalBC({
        BoundaryTag.BOTTOM: Robin(200.0, 300.0),
        BoundaryTag.OUTER: Robin(200.0, 300.0),
        BoundaryTag.TOP: ADIABATIC,
        BoundaryTag.INNER: Robin(2000.0, 1773.0),
        BoundaryTag.AXIS: ADIABATIC,
    })


def hearth_mechanical_bc() -> MechanicalBC:
    return MechanicalBC({
        BoundaryTag.BOTTOM: FRICTIONLESS_CONTACT,
        BoundaryTag.TOP: FRICTIONLESS_CONTACT,
        BoundaryTag.AXIS: FRICTIONLESS_CONTACT,
        BoundaryTag.INNER: hydrostatic_bc(HEARTH_Y_MAX),
        BoundaryTag.OUTER: Traction(lambda r, y, n: (0.0, 0.0)),
    })


def _load_scenario_mesh(config: RunConfig):
    if config.mesh_file is not None:
        return load_mesh(config.mesh_file)
    if config.scenario != "hearth":
        raise ValueError(f"unknown scenario '{config.scenario}'")
    return hearth_mesh(config.target_h)


def run_scenario(config: RunConfig) -> dict:
    """Mesh, thermal Newton solve, mechanical solve, stress recovery,
    exports. Returns a summary dict; artifacts land in the output dir."""
    config.validate()
    out = config.output_dir
    os.makedirs(out, exist_ok=True)

    mesh = _load_scenario_mesh(config)
    save_mesh(mesh, os.path.join(out, "mesh.txt"))
    materials = build_hearth_materials()

    newton_cfg = NewtonConfig(abs_tol=config.newton_tol,
                              max_iter=config.newton_max_iter,
                              initial_guess=config.initial_guess,
                              solver=config.solver)
    T, thermal_report = newton_solve(mesh, materials, hearth_thermal_bc(),
                                     newton_cfg)
    axio.export_report(thermal_report,
                       os.path.join(out, "thermal_report.json"))

    u, mech_report = solve_mechanical(mesh, materials, hearth_mechanical_bc(), T)
    axio.export_report(mech_report,
                       os.path.join(out, "mechanical_report.json"))

    stress = recover_stress(mesh, materials, T, u)
    axio.export_vtk(mesh, os.path.join(out, "solution.vtk"),
                    temperature=T, displacement=u, stress=stress.stress)
    axio.export_csv(mesh, os.path.join(out, "fields.csv"), T, u)

    for level in config.isoline_levels:
        iso = extract_isoline(mesh, T, level)
        axio.atomic_write_text(
            os.path.join(out, f"isoline_{level:g}K.csv"), isoline_csv(iso))

    axio.atomic_write_text(os.path.join(out, "config.json"), config.to_json())
    return {
        "nodes": mesh.num_nodes,
        "temperature_dofs": mesh.num_nodes,
        "displacement_dofs": 2 * mesh.num_nodes,
        "newton_iterations": thermal_report.iterations,
        "final_residual": thermal_report.residuals[-1],
        "T_range": (float(T.min()), float(T.max())),
        "max_displacement": float(np.linalg.norm(u, axis=1).max()),
    }


def _config_from_args(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "case", None) is not None:
        config.scenario = args.case
    if getattr(args, "mesh_file", None) is not None:
        config.mesh_file = args.mesh_file
    if getattr(args, "h", None) is not None:
        config.target_h = args.h
    if getattr(args, "out", None) is not None:
        config.output_dir = args.out
    if getattr(args, "newton_tol", None) is not None:
        config.newton_tol = args.newton_tol
    if getattr(args, "newton_max_iter", None) is not None:
        config.newton_max_iter = args.newton_max_iter
    if getattr(args, "solver", None) is not None:
        config.solver = args.solver
    if getattr(args, "isoline", None):
        config.isoline_levels = list(args.isoline)
    return config


def _cmd_solve(args) -> int:
    config = _config_from_args(args)
    summary = run_scenario(config)
    for k, v in summary.items():
        print(f"{k}: {v}")
    return 0


def _cmd_verify(args) -> int:
    ok = True
    if args.suite in ("all", "materials"):
        report = ver.spline_coefficient_report()
        bad = [c for c in report if not c.ok]
        print(f"spline coefficients: {len(report) - len(bad)}/{len(report)} ok")
        ok &= not bad
    if args.suite in ("all", "annulus"):
        rec, rel = ver.annulus_study()
        order = rec.observed_order()
        passed = rel[-1] < 1e-3 and order >= 1.9
        print(f"annulus: rel L2 {rel[-1]:.2e}, order {order:.2f} "
              f"({'ok' if passed else 'FAIL'})")
        ok &= passed
    if args.suite in ("all", "mms"):
        import sympy as sp
        r, y, T = sp.symbols("r y T", positive=True)
        tcase = ver.ThermalManufacturedCase(
            exact_expr=300 + 50 * r**2 + 20 * y,
            conductivity_expr=1 + 1e-3 * T)
        rec = ver.mms_thermal_study(tcase, [1 / 8, 1 / 16, 1 / 32])
        t_order = rec.observed_order()
        mcase = ver.MechanicalManufacturedCase(
            ur_expr=1e-4 * r * y, uy_expr=1e-4 * r**2,
            delta_T_expr=100 * r)
        rec2 = ver.mms_mechanical_study(mcase, [1 / 8, 1 / 16, 1 / 32])
        m_order = rec2.observed_order()
        passed = t_order >= 1.9 and m_order >= 1.9
        print(f"mms: thermal order {t_order:.2f}, mechanical order "
              f"{m_order:.2f} ({'ok' if passed else 'FAIL'})")
        ok &= passed
    return 0 if ok else 1


def _cmd_fit_materials(args) -> int:
    report = ver.spline_coefficient_report()
    print(ver.format_coefficient_report(report), end="")
    return 0 if all(c.ok for c in report) else 1


def _cmd_isoline(args) -> int:
    mesh = load_mesh(args.mesh_file)
    with open(args.csv) as f:
        rows = [line.strip().split(",") for line in f][1:]
    T = np.zeros(mesh.num_nodes)
    for row in rows:
        T[int(row[0])] = float(row[3])
    for level in args.isoline:
        iso = extract_isoline(mesh, T, level)
        path = os.path.join(args.out, f"isoline_{level:g}K.csv")
        os.makedirs(args.out, exist_ok=True)
        axio.atomic_write_text(path, isoline_csv(iso))
        print(f"{path}: {len(iso.polylines)} polylines")
    return 0


def _cmd_mesh(args) -> int:
    config = _config_from_args(args)
    if config.target_h <= 0:
        raise ValueError("target_h must be positive")
    mesh = _load_scenario_mesh(config)
    os.makedirs(config.output_dir, exist_ok=True)
    save_mesh(mesh, os.path.join(config.output_dir, "mesh.txt"))
    print(f"nodes: {mesh.num_nodes}")
    print(f"triangles: {len(mesh.triangles)}")
    print(f"h: {mesh.h:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axitherm",
        description="Axisymmetric thermomechanical finite element solver")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--case", default=None)
        p.add_argument("--mesh-file", dest="mesh_file", default=None)
        p.add_argument("--h", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--config", default=None)

    p_solve = sub.add_parser("solve", help="run a full scenario")
    common(p_solve)
    p_solve.add_argument("--newton-tol", type=float, default=None)
    p_solve.add_argument("--newton-max-iter", type=int, default=None)
    p_solve.add_argument("--solver", choices=["lu", "cg"], default=None)
    p_solve.add_argument("--isoline", type=float, action="append", default=None)
    p_solve.set_defaults(func=_cmd_solve)

    p_verify = sub.add_parser("verify", help="run verification oracles")
    p_verify.add_argument("--suite", default="all",
                          choices=["all", "materials", "annulus", "mms"])
    p_verify.set_defaults(func=_cmd_verify)

    p_fit = sub.add_parser("fit-materials",
                           help="print fitted spline coefficients")
    p_fit.set_defaults(func=_cmd_fit_materials)

    p_iso = sub.add_parser("isoline", help="extract isolines from a run")
    p_iso.add_argument("--mesh-file", dest="mesh_file", required=True)
    p_iso.add_argument("--csv", required=True,
                       help="fields.csv from a previous run")
    p_iso.add_argument("--isoline", type=float, action="append", required=True)
    p_iso.add_argument("--out", default=".")
    p_iso.set_defaults(func=_cmd_isoline)

    p_mesh = sub.add_parser("mesh", help="generate and export a mesh")
    common(p_mesh)
    p_mesh.set_defaults(func=_cmd_mesh)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver failures and the like
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
