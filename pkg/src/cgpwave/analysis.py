"""Error norms against exact solutions, discrete energy, and EOC tables.

The L-infinity norms sample a uniform grid of reference times on every slab
(final time appended); the L2-in-time norms use per-slab Gauss quadrature.
All six numbers of a convergence-table row come from two sweeps that share
the sparse basis-evaluation products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .quadrature import gauss_rule
from .stepper import SlabTrajectory

METRICS = ("e0_linf", "e1_linf", "e0_l2", "e1_l2", "energy_linf", "energy_l2")


def _slab_times(partition, n: int, that: np.ndarray) -> np.ndarray:
    a, b = partition.t_grid[n - 1], partition.t_grid[n]
    return 0.5 * (a + b) + 0.5 * (b - a) * that


def _sample_sq_errors(solution, exact, n: int, that: np.ndarray,
                      want_grad: bool = False) -> dict:
    """Squared spatial L2 error norms at reference times on slab n.

    Returns e0sq, e1sq and optionally gradsq as (S,) arrays.  exact may be a
    WaveProblem or another trajectory on the same partition (self-comparison).
    """
    space = solution.space
    if space is None:
        raise ValueError("error norms need a trajectory with an attached space")
    grid = space.quad_grid(space.degree + 3)
    C0, C1 = solution.coeffs_at(n, that)
    out = {}
    if hasattr(exact, "coeffs_at"):
        E0, E1 = exact.coeffs_at(n, that)
        V0 = grid.B @ (C0 - E0)
        V1 = grid.B @ (C1 - E1)
        if want_grad:
            Gx = grid.Bx @ (C0 - E0)
            Gy = grid.By @ (C0 - E0)
    else:
        times = _slab_times(solution.partition, n, that)[None, :]
        X1 = grid.x1[:, None]
        X2 = grid.x2[:, None]
        V0 = grid.B @ C0 - exact.exact_u(X1, X2, times)
        V1 = grid.B @ C1 - exact.exact_dtu(X1, X2, times)
        if want_grad:
            gx, gy = exact.exact_grad(X1, X2, times)
            Gx = grid.Bx @ C0 - gx
            Gy = grid.By @ C0 - gy
    out["e0sq"] = grid.w @ (V0 * V0)
    out["e1sq"] = grid.w @ (V1 * V1)
    if want_grad:
        out["gradsq"] = grid.w @ (Gx * Gx) + grid.w @ (Gy * Gy)
    return out


def _linf_grid(samples_per_slab: int) -> np.ndarray:
    j = np.arange(samples_per_slab)
    return -1.0 + 2.0 * j / samples_per_slab


def linf_l2_error(solution, exact, samples_per_slab: int = 1000) -> tuple:
    """Max over the slab sampling grids (plus t=T) of the spatial L2 errors."""
    if samples_per_slab < 1:
        raise ValueError("samples_per_slab must be >= 1")
    part = solution.partition
    that = _linf_grid(samples_per_slab)
    m0 = m1 = 0.0
    for n in range(1, part.n_slabs + 1):
        d = _sample_sq_errors(solution, exact, n, that)
        m0 = max(m0, float(d["e0sq"].max()))
        m1 = max(m1, float(d["e1sq"].max()))
    d = _sample_sq_errors(solution, exact, part.n_slabs, np.array([1.0]))
    m0 = max(m0, float(d["e0sq"][0]))
    m1 = max(m1, float(d["e1sq"][0]))
    return np.sqrt(m0), np.sqrt(m1)


def l2_l2_error(solution, exact, time_quad_pts: int | None = None) -> tuple:
    """L2(0,T; L2) error of both components via per-slab Gauss quadrature."""
    part = solution.partition
    k = solution.base.k if hasattr(solution, "base") else solution.k
    rule = gauss_rule(time_quad_pts if time_quad_pts is not None else k + 3)
    acc0 = acc1 = 0.0
    for n in range(1, part.n_slabs + 1):
        d = _sample_sq_errors(solution, exact, n, rule.nodes)
        half = 0.5 * part.tau(n)
        acc0 += half * float(rule.weights @ d["e0sq"])
        acc1 += half * float(rule.weights @ d["e1sq"])
    return np.sqrt(acc0), np.sqrt(acc1)


def energy_error(solution, exact, mode: str = "linf",
                 samples_per_slab: int = 1000,
                 time_quad_pts: int | None = None) -> float:
    """Energy-norm error sqrt(|grad e0|^2 + |e1|^2), maximized or integrated."""
    part = solution.partition
    if mode == "linf":
        that = _linf_grid(samples_per_slab)
        m = 0.0
        for n in range(1, part.n_slabs + 1):
            d = _sample_sq_errors(solution, exact, n, that, want_grad=True)
            m = max(m, float((d["gradsq"] + d["e1sq"]).max()))
        d = _sample_sq_errors(solution, exact, part.n_slabs, np.array([1.0]),
                              want_grad=True)
        m = max(m, float(d["gradsq"][0] + d["e1sq"][0]))
        return float(np.sqrt(m))
    if mode == "l2":
        k = solution.base.k if hasattr(solution, "base") else solution.k
        rule = gauss_rule(time_quad_pts if time_quad_pts is not None else k + 3)
        acc = 0.0
        for n in range(1, part.n_slabs + 1):
            d = _sample_sq_errors(solution, exact, n, rule.nodes, want_grad=True)
            acc += 0.5 * part.tau(n) * float(rule.weights @ (d["gradsq"] + d["e1sq"]))
        return float(np.sqrt(acc))
    raise ValueError(f"mode must be 'linf' or 'l2', got {mode!r}")


def collect_errors(solution, exact, samples_per_slab: int = 1000,
                   time_quad_pts: int | None = None) -> dict:
    """All six table numbers in two sweeps (shared basis products)."""
    part = solution.partition
    k = solution.base.k if hasattr(solution, "base") else solution.k
    rule = gauss_rule(time_quad_pts if time_quad_pts is not None else k + 3)
    that = _linf_grid(samples_per_slab)
    m0 = m1 = men = 0.0
    acc0 = acc1 = accen = 0.0
    for n in range(1, part.n_slabs + 1):
        d = _sample_sq_errors(solution, exact, n, that, want_grad=True)
        m0 = max(m0, float(d["e0sq"].max()))
        m1 = max(m1, float(d["e1sq"].max()))
        men = max(men, float((d["gradsq"] + d["e1sq"]).max()))
        g = _sample_sq_errors(solution, exact, n, rule.nodes, want_grad=True)
        half = 0.5 * part.tau(n)
        acc0 += half * float(rule.weights @ g["e0sq"])
        acc1 += half * float(rule.weights @ g["e1sq"])
        accen += half * float(rule.weights @ (g["gradsq"] + g["e1sq"]))
    d = _sample_sq_errors(solution, exact, part.n_slabs, np.array([1.0]),
                          want_grad=True)
    m0 = max(m0, float(d["e0sq"][0]))
    m1 = max(m1, float(d["e1sq"][0]))
    men = max(men, float(d["gradsq"][0] + d["e1sq"][0]))
    return {"e0_linf": float(np.sqrt(m0)), "e1_linf": float(np.sqrt(m1)),
            "e0_l2": float(np.sqrt(acc0)), "e1_l2": float(np.sqrt(acc1)),
            "energy_linf": float(np.sqrt(men)), "energy_l2": float(np.sqrt(accen))}


def discrete_energy(traj, space, n: int) -> float:
    """Nodal energy (U1, M U1) + (U0, A U0) at partition node t_n."""
    if hasattr(traj, "base"):
        traj = traj.base
    U0, U1 = traj.node_value(n)
    return float(U1 @ (space.mass @ U1) + U0 @ (space.stiffness @ U0))


def eoc(errors, ratio: float = 2.0) -> np.ndarray:
    """Observed orders log(err_{i-1}/err_i)/log(ratio); nan where undefined."""
    errors = np.asarray(errors, dtype=float)
    out = np.full(max(errors.size - 1, 0), np.nan)
    for i in range(1, errors.size):
        if errors[i - 1] > 0 and errors[i] > 0:
            out[i - 1] = np.log(errors[i - 1] / errors[i]) / np.log(ratio)
    return out


@dataclass
class LevelResult:
    """One refinement level: step sizes and the six metrics per solution kind."""

    level: int
    tau: float
    h: float
    unlifted: dict
    lifted: dict

    def metrics(self, kind: str) -> dict:
        if kind == "unlifted":
            return self.unlifted
        if kind == "lifted":
            return self.lifted
        raise ValueError(f"kind must be 'unlifted' or 'lifted', got {kind!r}")


@dataclass
class ErrorReport:
    """Convergence study results across levels, for lifted and unlifted."""

    problem: str
    k: int
    r: int
    refine_mode: str
    levels: List[LevelResult]

    def series(self, kind: str, metric: str) -> np.ndarray:
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        return np.array([lvl.metrics(kind)[metric] for lvl in self.levels])

    def eoc_series(self, kind: str, metric: str) -> np.ndarray:
        return eoc(self.series(kind, metric))
