"""Lifting post-processor: raises the C0 piecewise degree-k trajectory to a
C1 piecewise degree-(k+1) one by subtracting jump multiples of the slab
polynomial theta_n, which vanishes at all Gauss-Lobatto nodes and has unit
time derivative at the slab's left endpoint.

The jump vectors follow the forward recursion started from the discrete
initial derivative; a closed-form expression for the same jumps is kept as
an independent test oracle (jump_from_equation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .linalg import cg_solve, lu_factor, lu_solve
from .stepper import MolSystem, SlabTrajectory, TimePartition, _node_loads


@dataclass(frozen=True)
class ThetaPoly:
    """theta_n in reference form: scale * prod_mu (that - node_mu).

    The scale makes the physical derivative at the left endpoint equal 1;
    the product form keeps the nodal zeros exact.
    """

    n: int
    nodes: np.ndarray = field(repr=False)
    tau: float = 0.0
    scale: float = 0.0

    def value_ref(self, that) -> np.ndarray:
        that = np.asarray(that, dtype=float)
        out = np.full(that.shape, self.scale)
        for x in self.nodes:
            out = out * (that - x)
        return out

    def deriv_ref(self, that) -> np.ndarray:
        """d theta / d that, by the product rule over the nodal factors."""
        that = np.asarray(that, dtype=float)
        out = np.zeros(that.shape)
        m = self.nodes.size
        for j in range(m):
            term = np.full(that.shape, self.scale)
            for i in range(m):
                if i != j:
                    term = term * (that - self.nodes[i])
            out += term
        return out

    def deriv_phys(self, that) -> np.ndarray:
        return self.deriv_ref(that) * (2.0 / self.tau)


def build_theta(partition: TimePartition, n: int) -> ThetaPoly:
    """theta for slab n; degree k+1, zero at every Gauss-Lobatto node."""
    nodes = partition.ref_nodes
    tau = partition.tau(n)
    denom = float(np.prod(-1.0 - nodes[1:]))
    return ThetaPoly(n=n, nodes=nodes, tau=tau, scale=(tau / 2.0) / denom)


def initial_derivative(system: MolSystem, solver: str = "cg",
                       tol: float = 1e-12) -> tuple:
    """Discrete time derivative at t=0: (U1_0, M^{-1}(b(0) - A U0_0))."""
    U0, U1 = (np.asarray(v, dtype=float) for v in system.initial)
    rhs = system.load(0.0) - system.A @ U0
    if solver == "cg":
        d1 = cg_solve(system.M, rhs, tol=tol)
    elif solver == "direct":
        d1 = lu_solve(lu_factor(system.M), rhs)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return U1.copy(), d1


@dataclass
class LiftedTrajectory:
    """Base trajectory plus per-slab jump pairs and theta polynomials."""

    base: SlabTrajectory
    init_deriv: tuple
    c0: np.ndarray                    # (n_slabs, n_dofs)
    c1: np.ndarray
    thetas: List[ThetaPoly]

    @property
    def partition(self) -> TimePartition:
        return self.base.partition

    @property
    def space(self):
        return self.base.space

    def coeffs_at(self, n: int, that) -> tuple:
        """Lifted sample matrices (n_dofs, S) on slab n."""
        th = self.thetas[n - 1].value_ref(np.atleast_1d(that))
        B0, B1 = self.base.coeffs_at(n, that)
        return B0 - np.outer(self.c0[n - 1], th), B1 - np.outer(self.c1[n - 1], th)

    def deriv_coeffs_at(self, n: int, that) -> tuple:
        dth = self.thetas[n - 1].deriv_phys(np.atleast_1d(that))
        D0, D1 = self.base.deriv_coeffs_at(n, that)
        return D0 - np.outer(self.c0[n - 1], dth), D1 - np.outer(self.c1[n - 1], dth)


def lift(traj: SlabTrajectory, system: MolSystem, solver: str = "cg",
         tol: float = 1e-12) -> LiftedTrajectory:
    """Jump recursion over all slabs, started from the initial derivative."""
    part = traj.partition
    k = traj.k
    n_slabs = part.n_slabs
    n_dofs = traj.u0.shape[2]
    D = traj.basis.diff
    c0 = np.empty((n_slabs, n_dofs))
    c1 = np.empty((n_slabs, n_dofs))
    thetas = [build_theta(part, n) for n in range(1, n_slabs + 1)]

    init0, init1 = initial_derivative(system, solver=solver, tol=tol)
    incoming0, incoming1 = init0, init1
    for n in range(1, n_slabs + 1):
        s = 2.0 / part.tau(n)
        left0 = s * (D[0] @ traj.u0[n - 1])
        left1 = s * (D[0] @ traj.u1[n - 1])
        c0[n - 1] = left0 - incoming0
        c1[n - 1] = left1 - incoming1
        dth_right = thetas[n - 1].deriv_phys(1.0)
        incoming0 = s * (D[k] @ traj.u0[n - 1]) - c0[n - 1] * dth_right
        incoming1 = s * (D[k] @ traj.u1[n - 1]) - c1[n - 1] * dth_right

    return LiftedTrajectory(base=traj, init_deriv=(init0, init1),
                            c0=c0, c1=c1, thetas=thetas)


def lifted_eval(lifted: LiftedTrajectory, t: float) -> tuple:
    """Lifted pair at time t: base value minus jump times theta."""
    n = lifted.partition.locate(t)
    that = lifted.partition.to_reference(n, t)
    C0, C1 = lifted.coeffs_at(n, that)
    return C0[:, 0], C1[:, 0]


def lifted_deriv_eval(lifted: LiftedTrajectory, t: float) -> tuple:
    """Time derivative of the lifted pair at t; equals init_deriv at t=0."""
    n = lifted.partition.locate(t)
    that = lifted.partition.to_reference(n, t)
    D0, D1 = lifted.deriv_coeffs_at(n, that)
    return D0[:, 0], D1[:, 0]


def jump_from_equation(traj: SlabTrajectory, system: MolSystem, n: int,
                       solver: str = "cg", tol: float = 1e-12) -> tuple:
    """Closed-form jump pair for slab n (test oracle, not used by lift).

    c0 = d_t u0|_{I_n}(t_{n-1}) - u1(t_{n-1});
    c1 = d_t u1|_{I_n}(t_{n-1}) - M^{-1}(b(t_{n-1}) - A u0(t_{n-1})).
    """
    part = traj.partition
    s = 2.0 / part.tau(n)
    D = traj.basis.diff
    left0 = s * (D[0] @ traj.u0[n - 1])
    left1 = s * (D[0] @ traj.u1[n - 1])
    U0_l = traj.u0[n - 1, 0]
    U1_l = traj.u1[n - 1, 0]
    rhs = system.load(float(part.t_grid[n - 1])) - system.A @ U0_l
    if solver == "cg":
        d1 = cg_solve(system.M, rhs, tol=tol)
    elif solver == "direct":
        d1 = lu_solve(lu_factor(system.M), rhs)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return left0 - U1_l, left1 - d1


def pointwise_residual(lifted: LiftedTrajectory, system: MolSystem, t: float,
                       node_loads: np.ndarray | None = None) -> float:
    """Relative residual of the lifted strong-form identity at time t.

    The lifted derivative must satisfy M dL u0 = M u1 and
    M dL u1 + A u0 = b_I(t), with b_I the nodal Lagrange interpolant of the
    load on the containing slab.
    """
    part = lifted.partition
    n = part.locate(t)
    that = part.to_reference(n, t)
    if node_loads is None:
        node_loads = _node_loads(system, part, n)
    ell = lifted.base.basis.values_at(that)                   # (k+1,)
    b_interp = ell @ node_loads

    C0, C1 = lifted.coeffs_at(n, that)
    D0, D1 = lifted.deriv_coeffs_at(n, that)
    u0, u1 = C0[:, 0], C1[:, 0]
    d0, d1 = D0[:, 0], D1[:, 0]

    Md0 = system.M @ d0
    Mu1 = system.M @ u1
    Md1 = system.M @ d1
    Au0 = system.A @ u0
    r0 = Md0 - Mu1
    r1 = Md1 + Au0 - b_interp
    scale = max(np.abs(Md0).max(), np.abs(Mu1).max(), np.abs(Md1).max(),
                np.abs(Au0).max(), np.abs(b_interp).max(), 1e-300)
    return float(max(np.abs(r0).max(), np.abs(r1).max()) / scale)
