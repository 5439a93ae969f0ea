"""Sparse linear algebra: Jacobi-CG for SPD systems, direct LU, and the
kron-structured slab operator of the continuous Petrov-Galerkin step.

Matrices are scipy CSR/CSC; the direct factorization delegates to SuperLU
behind a thin wrapper so the residual contract stays checkable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .quadrature import gauss_lobatto_rule, gauss_rule, nodal_basis


class NonConvergenceError(RuntimeError):
    """CG hit its iteration cap; carries the final relative residual."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"cg_solve: no convergence after {iterations} iterations "
            f"(relative residual {residual:.3e})")


class SingularMatrixError(RuntimeError):
    """Factorization failed beyond what pivoting can recover."""


def cg_solve(A, b: np.ndarray, tol: float = 1e-12, max_iter: int | None = None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients for SPD A.

    Terminates when ||A x - b|| <= tol * ||b||.  The default iteration cap is
    the matrix dimension (the exact-arithmetic bound).
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    if max_iter is None:
        max_iter = n
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros(n)
    inv_diag = 1.0 / A.diagonal()
    x = np.zeros(n)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r)
        if res <= tol * b_norm:
            return x
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NonConvergenceError(max_iter, float(np.linalg.norm(r) / b_norm))


@dataclass
class LuFactorization:
    """Holds the factored operator; solve is stateless and reusable."""

    shape: tuple
    _lu: object = field(repr=False)


def lu_factor(A) -> LuFactorization:
    """Sparse LU with partial pivoting (SuperLU)."""
    Acsc = sp.csc_matrix(A)
    try:
        lu = spla.splu(Acsc)
    except RuntimeError as exc:
        raise SingularMatrixError(str(exc)) from exc
    return LuFactorization(shape=Acsc.shape, _lu=lu)


def lu_solve(fact: LuFactorization, b: np.ndarray) -> np.ndarray:
    return fact._lu.solve(np.asarray(b, dtype=float))


def slab_coupling(k: int):
    """Coupling data of the cGP(k) slab system.

    Returns (alpha, D, gl_rule): alpha[j, nu] = w_nu * psi_j(t_nu) with psi_j
    the Lagrange test basis on the k Gauss points evaluated at the k+1
    Gauss-Lobatto nodes t_nu, and D the Gauss-Lobatto differentiation matrix.
    """
    gl = gauss_lobatto_rule(k + 1)
    D = nodal_basis(gl.nodes).diff
    test_nodes = gauss_rule(k).nodes
    psi = nodal_basis(test_nodes).values_at(gl.nodes)      # (k+1, k)
    alpha = psi.T * gl.weights[None, :]                    # (k, k+1)
    return alpha, D, gl


@dataclass
class BlockOperator:
    """The 2k x 2k block operator of one cGP(k) slab solve.

    Unknowns are the nodal values at the k interior-to-right Gauss-Lobatto
    nodes, stacked as (U0_1..U0_k, U1_1..U1_k); the known left value moves to
    the right-hand side.  All blocks are Kronecker products of small coupling
    matrices with M or A, so matvec never forms the big matrix.
    """

    k: int
    tau: float
    M: sp.csr_matrix
    A: sp.csr_matrix
    alpha: np.ndarray          # (k, k+1)
    G: np.ndarray              # (k, k+1): alpha @ D
    diff: np.ndarray           # (k+1, k+1) Gauss-Lobatto diff matrix

    @property
    def n_space(self) -> int:
        return self.M.shape[0]

    @property
    def shape(self) -> tuple:
        n = 2 * self.k * self.n_space
        return (n, n)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        k, N = self.k, self.n_space
        s = 2.0 / self.tau
        Gu = self.G[:, 1:]
        au = self.alpha[:, 1:]
        X0 = x[:k * N].reshape(k, N)
        X1 = x[k * N:].reshape(k, N)
        MX0 = (self.M @ X0.T).T
        MX1 = (self.M @ X1.T).T
        AX0 = (self.A @ X0.T).T
        y0 = s * (Gu @ MX0) - au @ MX1
        y1 = au @ AX0 + s * (Gu @ MX1)
        return np.concatenate([y0.ravel(), y1.ravel()])

    def assemble(self) -> sp.csr_matrix:
        """Explicit block matrix; matvec must agree with it."""
        s = 2.0 / self.tau
        Gu = self.G[:, 1:]
        au = self.alpha[:, 1:]
        return sp.bmat([[sp.kron(s * Gu, self.M), sp.kron(-au, self.M)],
                        [sp.kron(au, self.A), sp.kron(s * Gu, self.M)]],
                       format="csr")

    def rhs(self, prev0: np.ndarray, prev1: np.ndarray, loads: np.ndarray) -> np.ndarray:
        """Right-hand side from the left nodal value and the k+1 nodal loads."""
        s = 2.0 / self.tau
        Mp0 = self.M @ prev0
        Mp1 = self.M @ prev1
        Ap0 = self.A @ prev0
        r0 = -s * np.outer(self.G[:, 0], Mp0) + np.outer(self.alpha[:, 0], Mp1)
        r1 = self.alpha @ loads - s * np.outer(self.G[:, 0], Mp1) \
            - np.outer(self.alpha[:, 0], Ap0)
        return np.concatenate([r0.ravel(), r1.ravel()])

    def residual(self, prev0, prev1, slab0, slab1, loads) -> float:
        """Max relative residual of the quadrature-weighted slab equations."""
        s = 2.0 / self.tau
        U0 = np.vstack([prev0[None, :], slab0])
        U1 = np.vstack([prev1[None, :], slab1])
        MU0 = (self.M @ U0.T).T
        MU1 = (self.M @ U1.T).T
        AU0 = (self.A @ U0.T).T
        R0 = self.alpha @ (s * (self.diff @ MU0) - MU1)
        R1 = self.alpha @ (s * (self.diff @ MU1) + AU0 - loads)
        scale = max(np.abs(s * (self.diff @ MU0)).max(),
                    np.abs(MU1).max(), np.abs(AU0).max(),
                    np.abs(loads).max(), 1e-300)
        return float(max(np.abs(R0).max(), np.abs(R1).max()) / scale)


def make_block_operator(k: int, tau: float, M, A) -> BlockOperator:
    if k < 1:
        raise ValueError(f"temporal degree must be >= 1, got {k}")
    alpha, D, _ = slab_coupling(k)
    return BlockOperator(k=k, tau=tau, M=sp.csr_matrix(M), A=sp.csr_matrix(A),
                         alpha=alpha, G=alpha @ D, diff=D)
