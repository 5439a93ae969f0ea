"""Continuous Galerkin-Petrov time integrator for M u'' + A u = b(t),
rewritten first order as d/dt (u0, u1) + (-u1, M^{-1} A u0) = (0, M^{-1} b).

Each slab solves a 2k x 2k block system for the nodal values at the
Gauss-Lobatto points; the left node is known from continuity.  Uniform
partitions reuse a single LU factorization across all slabs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .fem import FeSpace, assemble_load, interpolate, ritz_project
from .linalg import BlockOperator, LuFactorization, lu_factor, lu_solve, make_block_operator
from .quadrature import NodalBasis, gauss_lobatto_rule, nodal_basis


@dataclass(frozen=True)
class TimePartition:
    """Slabs I_n = (t_{n-1}, t_n] with k+1 Gauss-Lobatto nodes per slab."""

    t_grid: np.ndarray
    k: int
    ref_nodes: np.ndarray = field(repr=False)

    @property
    def n_slabs(self) -> int:
        return self.t_grid.size - 1

    @property
    def final_time(self) -> float:
        return float(self.t_grid[-1])

    def tau(self, n: int) -> float:
        return float(self.t_grid[n] - self.t_grid[n - 1])

    def slab_nodes(self, n: int) -> np.ndarray:
        """Physical Gauss-Lobatto times t_{n,mu}; endpoints exactly t_{n-1}, t_n."""
        a, b = self.t_grid[n - 1], self.t_grid[n]
        nodes = 0.5 * (a + b) + 0.5 * (b - a) * self.ref_nodes
        nodes[0] = a
        nodes[-1] = b
        return nodes

    def to_reference(self, n: int, t) -> np.ndarray:
        """Map physical time(s) in slab n to [-1, 1]; endpoints map exactly."""
        a, b = self.t_grid[n - 1], self.t_grid[n]
        t = np.asarray(t, dtype=float)
        return ((t - a) - (b - t)) / (b - a)

    def locate(self, t: float) -> int:
        """1-based slab index with t in (t_{n-1}, t_n]; t_0 belongs to slab 1."""
        tg = self.t_grid
        tol = 1e-12 * max(1.0, abs(tg[-1]))
        if t < tg[0] - tol or t > tg[-1] + tol:
            raise ValueError(f"time {t} outside [{tg[0]}, {tg[-1]}]")
        n = int(np.searchsorted(tg, t, side="left"))
        return min(max(n, 1), self.n_slabs)

    def is_uniform(self) -> bool:
        taus = np.diff(self.t_grid)
        return bool(np.max(np.abs(taus - taus[0])) <= 1e-12 * abs(taus[0]))


def uniform_partition(T: float, N: int, k: int) -> TimePartition:
    if N < 1 or T <= 0:
        raise ValueError(f"need N >= 1 and T > 0, got N={N}, T={T}")
    return time_partition(np.linspace(0.0, T, N + 1), k)


def time_partition(t_grid, k: int) -> TimePartition:
    t_grid = np.asarray(t_grid, dtype=float)
    if k < 1:
        raise ValueError(f"temporal degree must be >= 1, got {k}")
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing with >= 2 entries")
    return TimePartition(t_grid=t_grid, k=k,
                         ref_nodes=gauss_lobatto_rule(k + 1).nodes)


@dataclass
class MolSystem:
    """Method-of-lines data: matrices, load map t -> b(t), initial pair."""

    M: sp.csr_matrix
    A: sp.csr_matrix
    load: Callable[[float], np.ndarray]
    initial: tuple
    space: Optional[FeSpace] = None


def make_system(space: FeSpace, problem, initial_mode: str = "ritz",
                solver: str = "cg", tol: float = 1e-12) -> MolSystem:
    """Assemble a MolSystem for a WaveProblem on the given space.

    ritz mode takes the elliptic projection of both initial fields (needs
    gradients); interpolate mode samples them at the lattice points.
    """
    if initial_mode == "ritz":
        U0 = ritz_project(space, problem.u0, solver=solver, tol=tol)
        U1 = ritz_project(space, problem.u1, solver=solver, tol=tol)
    elif initial_mode == "interpolate":
        U0 = interpolate(space, problem.u0)
        U1 = interpolate(space, problem.u1)
    else:
        raise ValueError(f"initial_mode must be 'ritz' or 'interpolate', got {initial_mode!r}")

    def load(t: float) -> np.ndarray:
        return assemble_load(space, lambda x1, x2: problem.rhs_f(x1, x2, t))

    return MolSystem(M=space.mass, A=space.stiffness, load=load,
                     initial=(U0, U1), space=space)


def _node_loads(system: MolSystem, partition: TimePartition, n: int) -> np.ndarray:
    return np.array([system.load(t) for t in partition.slab_nodes(n)])


def cgp_step(system: MolSystem, partition: TimePartition, n: int, prev,
             op: Optional[BlockOperator] = None,
             lu: Optional[LuFactorization] = None):
    """Solve slab n; returns (U0, U1) arrays of shape (k, n_dofs), mu = 1..k."""
    k = partition.k
    prev0, prev1 = (np.asarray(v, dtype=float) for v in prev)
    if op is None:
        op = make_block_operator(k, partition.tau(n), system.M, system.A)
    if lu is None:
        lu = lu_factor(op.assemble())
    loads = _node_loads(system, partition, n)
    x = lu_solve(lu, op.rhs(prev0, prev1, loads))
    N = prev0.size
    return x[:k * N].reshape(k, N), x[k * N:].reshape(k, N)


@dataclass
class SlabTrajectory:
    """Nodal coefficients per slab: u0[n-1, mu], u1[n-1, mu], mu = 0..k.

    Node 0 of slab n is a copy of node k of slab n-1 (continuity); node 0 of
    slab 1 is the initial pair.
    """

    partition: TimePartition
    k: int
    u0: np.ndarray                    # (n_slabs, k+1, n_dofs)
    u1: np.ndarray
    basis: NodalBasis = field(repr=False)
    space: Optional[FeSpace] = None

    def node_value(self, n: int):
        """Trajectory pair at the partition node t_n, 0 <= n <= N."""
        if n == 0:
            return self.u0[0, 0], self.u1[0, 0]
        return self.u0[n - 1, -1], self.u1[n - 1, -1]

    def coeffs_at(self, n: int, that) -> tuple:
        """Pair of (n_dofs, S) sample matrices on slab n at reference times."""
        L = self.basis.values_at(np.atleast_1d(that))          # (S, k+1)
        return self.u0[n - 1].T @ L.T, self.u1[n - 1].T @ L.T

    def deriv_coeffs_at(self, n: int, that) -> tuple:
        """Physical time derivative samples, shape (n_dofs, S)."""
        Ld = self.basis.derivs_at(np.atleast_1d(that)) * (2.0 / self.partition.tau(n))
        return self.u0[n - 1].T @ Ld.T, self.u1[n - 1].T @ Ld.T


def integrate(system: MolSystem, partition: TimePartition) -> SlabTrajectory:
    """March all slabs; one factorization is reused when the steps are uniform."""
    k = partition.k
    N = system.M.shape[0]
    n_slabs = partition.n_slabs
    u0 = np.empty((n_slabs, k + 1, N))
    u1 = np.empty((n_slabs, k + 1, N))

    shared_op = shared_lu = None
    if partition.is_uniform():
        shared_op = make_block_operator(k, partition.tau(1), system.M, system.A)
        shared_lu = lu_factor(shared_op.assemble())

    prev0 = np.asarray(system.initial[0], dtype=float)
    prev1 = np.asarray(system.initial[1], dtype=float)
    for n in range(1, n_slabs + 1):
        op, lu = shared_op, shared_lu
        if op is None:
            op = make_block_operator(k, partition.tau(n), system.M, system.A)
            lu = lu_factor(op.assemble())
        s0, s1 = cgp_step(system, partition, n, (prev0, prev1), op=op, lu=lu)
        u0[n - 1, 0] = prev0
        u1[n - 1, 0] = prev1
        u0[n - 1, 1:] = s0
        u1[n - 1, 1:] = s1
        prev0 = u0[n - 1, -1].copy()
        prev1 = u1[n - 1, -1].copy()

    return SlabTrajectory(partition=partition, k=k, u0=u0, u1=u1,
                          basis=nodal_basis(partition.ref_nodes),
                          space=system.space)


def evaluate(traj: SlabTrajectory, t: float) -> tuple:
    """Trajectory pair at physical time t (Lagrange evaluation on its slab)."""
    n = traj.partition.locate(t)
    that = traj.partition.to_reference(n, t)
    C0, C1 = traj.coeffs_at(n, that)
    return C0[:, 0], C1[:, 0]


def step_residual(system: MolSystem, partition: TimePartition, n: int,
                  traj: SlabTrajectory) -> float:
    """Relative residual of the slab-n equations for a computed trajectory."""
    op = make_block_operator(partition.k, partition.tau(n), system.M, system.A)
    loads = _node_loads(system, partition, n)
    return op.residual(traj.u0[n - 1, 0], traj.u1[n - 1, 0],
                       traj.u0[n - 1, 1:], traj.u1[n - 1, 1:], loads)
