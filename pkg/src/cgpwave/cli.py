"""Study driver and command-line front end.

Subcommands: study (convergence sweep), run (single level), energy
(conservation check), tables (regenerate markdown from CSV).  Every config
key has a default; a flat key=value file and command-line flags override in
that order.  CSV output is full precision and byte-reproducible; markdown
mirrors the convergence-table layout with grouped sup- and L2-in-time
columns.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import asdict, dataclass, replace
from typing import List, Optional, get_type_hints

import numpy as np

from .analysis import METRICS, ErrorReport, LevelResult, collect_errors, discrete_energy, eoc
from .fem import build_space, unit_square_mesh
from .lifting import lift, lifted_eval
from .problems import get_problem
from .stepper import integrate, make_system, uniform_partition

_REFINE_MODES = ("time_only", "spacetime")
_INITIAL_MODES = ("ritz", "interpolate")
_SOLVERS = ("cg", "direct")


@dataclass(frozen=True)
class StudyConfig:
    """Run configuration; defaults reproduce the temporal-order table setup."""

    problem: str = "poly"
    k: int = 2
    r: int = 2
    levels: int = 5
    refine_mode: str = "time_only"
    N0: int = 10
    mesh_level0: int = 0
    samples_per_slab: int = 1000
    initial_mode: str = "ritz"
    solver: str = "cg"
    cg_tol: float = 1e-12
    prefix: str = "study"

    def validate(self) -> "StudyConfig":
        if self.k < 1 or self.r < 1 or self.levels < 1:
            raise ValueError("k, r, and levels must all be >= 1")
        if self.N0 < 1 or self.samples_per_slab < 1:
            raise ValueError("N0 and samples_per_slab must be >= 1")
        if self.refine_mode not in _REFINE_MODES:
            raise ValueError(f"refine_mode must be one of {_REFINE_MODES}")
        if self.initial_mode not in _INITIAL_MODES:
            raise ValueError(f"initial_mode must be one of {_INITIAL_MODES}")
        if self.solver not in _SOLVERS:
            raise ValueError(f"solver must be one of {_SOLVERS}")
        get_problem(self.problem)
        return self


def load_config(path: str) -> dict:
    """Parse a flat key = value file; '#' starts a comment."""
    hints = get_type_hints(StudyConfig)
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = (s.strip() for s in line.partition("="))
            if key not in hints:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            typ = hints[key]
            out[key] = typ(val) if typ is not str else val
    return out


def _level_setup(cfg: StudyConfig, level: int):
    N = cfg.N0 * 2 ** level
    mesh_level = cfg.mesh_level0 + (level if cfg.refine_mode == "spacetime" else 0)
    return N, mesh_level


def run_single(cfg: StudyConfig, level: int) -> LevelResult:
    """One refinement level: integrate, lift, and collect both metric sets."""
    problem = get_problem(cfg.problem)
    N, mesh_level = _level_setup(cfg, level)
    mesh = unit_square_mesh(mesh_level)
    space = build_space(mesh, cfg.r)
    system = make_system(space, problem, initial_mode=cfg.initial_mode,
                         solver=cfg.solver, tol=cfg.cg_tol)
    partition = uniform_partition(problem.T, N, cfg.k)
    traj = integrate(system, partition)
    lifted = lift(traj, system, solver=cfg.solver, tol=cfg.cg_tol)
    unlifted_errs = collect_errors(traj, problem, cfg.samples_per_slab)
    lifted_errs = collect_errors(lifted, problem, cfg.samples_per_slab)
    return LevelResult(level=level, tau=problem.T / N, h=mesh.diameter,
                       unlifted=unlifted_errs, lifted=lifted_errs)


def run_study(cfg: StudyConfig, write: bool = True, verbose: bool = True) -> ErrorReport:
    """Full sweep over cfg.levels refinement levels; optionally writes tables."""
    cfg.validate()
    results: List[LevelResult] = []
    for level in range(cfg.levels):
        t0 = time.perf_counter()
        try:
            results.append(run_single(cfg, level))
        except Exception as exc:
            raise RuntimeError(f"study level {level} "
                               f"(problem={cfg.problem}, k={cfg.k}, r={cfg.r}) "
                               f"failed: {exc}") from exc
        if verbose:
            N, mesh_level = _level_setup(cfg, level)
            lvl = results[-1]
            print(f"level {level}: N={N} mesh_level={mesh_level} "
                  f"e0_linf[lifted]={lvl.lifted['e0_linf']:.3e} "
                  f"({time.perf_counter() - t0:.2f}s)")
    report = ErrorReport(problem=cfg.problem, k=cfg.k, r=cfg.r,
                         refine_mode=cfg.refine_mode, levels=results)
    if write:
        emit_tables(report, "csv", prefix=cfg.prefix)
        emit_tables(report, "markdown", prefix=cfg.prefix)
    return report


@dataclass
class EnergyReport:
    """Nodal energies of a homogeneous run plus drift diagnostics."""

    N: int
    energies: np.ndarray           # base energies at t_0..t_N
    lifted_energies: np.ndarray
    drift_base: float
    drift_lifted: float
    node_gap: float                # max |lifted - base| over nodes


def run_energy(cfg: StudyConfig, verbose: bool = True) -> EnergyReport:
    """Energy-conservation check on the homogeneous benchmark (f = 0)."""
    if cfg.problem != "energy":
        raise ValueError("run_energy requires problem = 'energy'")
    cfg.validate()
    problem = get_problem(cfg.problem)
    mesh = unit_square_mesh(cfg.mesh_level0)
    space = build_space(mesh, cfg.r)
    system = make_system(space, problem, initial_mode=cfg.initial_mode,
                         solver=cfg.solver, tol=cfg.cg_tol)
    partition = uniform_partition(problem.T, cfg.N0, cfg.k)
    traj = integrate(system, partition)
    lifted = lift(traj, system, solver=cfg.solver, tol=cfg.cg_tol)

    M, A = space.mass, space.stiffness
    energies = np.array([discrete_energy(traj, space, n)
                         for n in range(cfg.N0 + 1)])
    lifted_energies = np.empty(cfg.N0 + 1)
    for n in range(cfg.N0 + 1):
        U0, U1 = lifted_eval(lifted, float(partition.t_grid[n]))
        lifted_energies[n] = U1 @ (M @ U1) + U0 @ (A @ U0)

    e0 = energies[0]
    drift_base = float(np.max(np.abs(energies - e0)) / e0)
    drift_lifted = float(np.max(np.abs(lifted_energies - lifted_energies[0]))
                         / lifted_energies[0])
    node_gap = float(np.max(np.abs(lifted_energies - energies)))
    if verbose:
        print(f"energy run: k={cfg.k} r={cfg.r} mesh_level={cfg.mesh_level0} N={cfg.N0}")
        print(f"E_0 = {e0:.12e}  (continuous energy pi^2/2 = {np.pi ** 2 / 2:.12e})")
        print(f"max relative drift, base:   {drift_base:.3e}")
        print(f"max relative drift, lifted: {drift_lifted:.3e}")
        print(f"max |lifted - base| at nodes: {node_gap:.3e}")
    return EnergyReport(N=cfg.N0, energies=energies,
                        lifted_energies=lifted_energies,
                        drift_base=drift_base, drift_lifted=drift_lifted,
                        node_gap=node_gap)


_CSV_HEADER = ("level,tau,h,e0_linf,eoc,e1_linf,eoc,e0_l2,eoc,e1_l2,eoc,"
               "energy_linf,eoc,energy_l2,eoc")
_MD_GROUPS = (("e0_linf", "sup-t L2"), ("e1_linf", "sup-t L2"),
              ("energy_linf", "sup-t EN"), ("e0_l2", "L2-t L2"),
              ("e1_l2", "L2-t L2"), ("energy_l2", "L2-t EN"))


def _ensure_dir(prefix: str):
    d = os.path.dirname(prefix)
    if d:
        os.makedirs(d, exist_ok=True)


def _write_csv(report: ErrorReport, kind: str, path: str):
    eocs = {m: report.eoc_series(kind, m) for m in METRICS}
    lines = [_CSV_HEADER]
    for i, lvl in enumerate(report.levels):
        cells = [str(lvl.level), f"{lvl.tau:.17e}", f"{lvl.h:.17e}"]
        for m in METRICS:
            cells.append(f"{lvl.metrics(kind)[m]:.17e}")
            cells.append("" if i == 0 else f"{eocs[m][i - 1]:.17e}")
        lines.append(",".join(cells))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_markdown(report: ErrorReport, path: str):
    lines = []
    title = report.problem or "study"
    lines.append(f"# Convergence study: {title} "
                 f"(k={report.k}, r={report.r}, {report.refine_mode})")
    for kind in ("unlifted", "lifted"):
        eocs = {m: report.eoc_series(kind, m) for m in METRICS}
        lines.append("")
        lines.append(f"## {kind}")
        lines.append("")
        head = ["level", "tau", "h"]
        for m, group in _MD_GROUPS:
            head += [f"{m} ({group})", "EOC"]
        lines.append("| " + " | ".join(head) + " |")
        lines.append("|" + "---|" * len(head))
        for i, lvl in enumerate(report.levels):
            row = [str(lvl.level), f"{lvl.tau:.3e}", f"{lvl.h:.3e}"]
            for m, _ in _MD_GROUPS:
                row.append(f"{lvl.metrics(kind)[m]:.3e}")
                row.append("--" if i == 0 else f"{eocs[m][i - 1]:.2f}")
            lines.append("| " + " | ".join(row) + " |")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_tables(report: ErrorReport, format: str = "csv",
                prefix: str = "study") -> List[str]:
    """Write the study tables; returns the written paths."""
    _ensure_dir(prefix)
    if format == "csv":
        paths = []
        for kind in ("unlifted", "lifted"):
            path = f"{prefix}_{kind}.csv"
            _write_csv(report, kind, path)
            paths.append(path)
        return paths
    if format == "markdown":
        path = f"{prefix}.md"
        _write_markdown(report, path)
        return [path]
    raise ValueError(f"format must be 'csv' or 'markdown', got {format!r}")


def read_csv_report(prefix: str) -> ErrorReport:
    """Rebuild an ErrorReport from the two CSV files written by emit_tables."""
    data = {}
    for kind in ("unlifted", "lifted"):
        path = f"{prefix}_{kind}.csv"
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        if not lines or lines[0] != _CSV_HEADER:
            raise ValueError(f"{path}: unexpected header")
        rows = []
        for ln in lines[1:]:
            cells = ln.split(",")
            rows.append({
                "level": int(cells[0]), "tau": float(cells[1]), "h": float(cells[2]),
                "metrics": {m: float(cells[3 + 2 * j]) for j, m in enumerate(METRICS)}})
        data[kind] = rows
    if [r["level"] for r in data["unlifted"]] != [r["level"] for r in data["lifted"]]:
        raise ValueError("lifted/unlifted CSV level mismatch")
    levels = [LevelResult(level=u["level"], tau=u["tau"], h=u["h"],
                          unlifted=u["metrics"], lifted=l["metrics"])
              for u, l in zip(data["unlifted"], data["lifted"])]
    return ErrorReport(problem="", k=0, r=0, refine_mode="", levels=levels)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--problem", choices=("poly", "trig", "energy"))
    p.add_argument("--k", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--refine-mode", dest="refine_mode", choices=_REFINE_MODES)
    p.add_argument("--n0", dest="N0", type=int, help="base slab count")
    p.add_argument("--mesh-level0", dest="mesh_level0", type=int)
    p.add_argument("--samples-per-slab", dest="samples_per_slab", type=int)
    p.add_argument("--initial-mode", dest="initial_mode", choices=_INITIAL_MODES)
    p.add_argument("--solver", choices=_SOLVERS)
    p.add_argument("--cg-tol", dest="cg_tol", type=float)
    p.add_argument("--prefix")


def _build_config(args, base: Optional[StudyConfig] = None) -> StudyConfig:
    cfg = base if base is not None else StudyConfig()
    if getattr(args, "config", None):
        cfg = replace(cfg, **load_config(args.config))
    overrides = {key: getattr(args, key)
                 for key in asdict(StudyConfig())
                 if getattr(args, key, None) is not None}
    return replace(cfg, **overrides).validate()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cgpwave",
        description="Space-time Galerkin wave solver: convergence studies, "
                    "energy checks, and table output.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_study = sub.add_parser("study", help="run a refinement sweep and write tables")
    _add_config_flags(p_study)

    p_run = sub.add_parser("run", help="run a single refinement level")
    _add_config_flags(p_run)
    p_run.add_argument("--level", type=int, default=0)

    p_energy = sub.add_parser("energy", help="energy-conservation check (f = 0)")
    _add_config_flags(p_energy)

    p_tables = sub.add_parser("tables", help="regenerate markdown from CSV output")
    p_tables.add_argument("--prefix", default="study")

    args = parser.parse_args(argv)
    try:
        if args.command == "study":
            run_study(_build_config(args))
        elif args.command == "run":
            cfg = _build_config(args)
            lvl = run_single(cfg, args.level)
            print(f"level {lvl.level}: tau={lvl.tau:.3e} h={lvl.h:.3e}")
            for kind in ("unlifted", "lifted"):
                row = "  ".join(f"{m}={lvl.metrics(kind)[m]:.6e}" for m in METRICS)
                print(f"  {kind}: {row}")
        elif args.command == "energy":
            base = StudyConfig(problem="energy", r=2, N0=20, mesh_level0=1,
                               solver="direct")
            run_energy(_build_config(args, base=base))
        elif args.command == "tables":
            report = read_csv_report(args.prefix)
            emit_tables(report, "markdown", prefix=args.prefix)
            print(f"wrote {args.prefix}.md")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
