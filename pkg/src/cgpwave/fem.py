"""Continuous Lagrange finite elements on a uniform square grid.

The domain is the open unit square with homogeneous Dirichlet data, so the
solver works on interior lattice dofs only.  Element matrices are computed
once on the reference cell and scattered; quadrature grids for loads and
error norms are cached per point count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .linalg import cg_solve, lu_factor, lu_solve
from .quadrature import gauss_rule, nodal_basis


@dataclass(frozen=True)
class Mesh:
    """Uniform n x n grid on the unit square."""

    level: int
    cells_per_side: int
    cell_size: float

    @property
    def diameter(self) -> float:
        """Cell diameter h = sqrt(2) * cell_size."""
        return np.sqrt(2.0) * self.cell_size


def unit_square_mesh(level: int) -> Mesh:
    """Refinement level L gives 2^(L+1) cells per side (level 0: 4 cells)."""
    if level < 0:
        raise ValueError(f"mesh level must be >= 0, got {level}")
    n = 2 ** (level + 1)
    return Mesh(level=level, cells_per_side=n, cell_size=1.0 / n)


@dataclass(frozen=True)
class SpatialFunction:
    """Scalar field on the square; gradient returns (d/dx1, d/dx2)."""

    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray, np.ndarray], tuple]] = None


@dataclass(frozen=True)
class QuadGrid:
    """Tensor Gauss points over all cells with basis evaluation matrices.

    B, Bx, By map interior dof coefficients to values / x- and y-derivatives
    at the points.  Boundary dofs carry zero Dirichlet values and are dropped.
    """

    x1: np.ndarray
    x2: np.ndarray
    w: np.ndarray
    B: sp.csr_matrix
    Bx: sp.csr_matrix
    By: sp.csr_matrix


@dataclass
class FeSpace:
    """Q_r Lagrange space on a Mesh; dofs live on the (r*n+1)^2 lattice."""

    mesh: Mesh
    degree: int
    lattice_width: int
    interior_index: np.ndarray        # lattice flat id -> interior id or -1
    interior_coords: np.ndarray       # (n_interior, 2)
    mass: sp.csr_matrix               # interior dofs
    stiffness: sp.csr_matrix
    mass_full: sp.csr_matrix          # boundary included, for diagnostics
    stiffness_full: sp.csr_matrix
    cell_dofmap: np.ndarray           # (n_cells, (r+1)^2) lattice flat ids
    basis_1d: object
    _grids: dict = field(default_factory=dict, repr=False)

    @property
    def n_interior(self) -> int:
        return self.interior_coords.shape[0]

    @property
    def interior_flat(self) -> np.ndarray:
        return np.flatnonzero(self.interior_index >= 0)

    def quad_grid(self, points_per_dim: int) -> QuadGrid:
        if points_per_dim not in self._grids:
            self._grids[points_per_dim] = _build_quad_grid(self, points_per_dim)
        return self._grids[points_per_dim]


def _cell_dofmap(n: int, r: int) -> np.ndarray:
    """Lattice indices of the (r+1)^2 local dofs for every cell, row-major."""
    W = r * n + 1
    a = np.arange(r + 1)
    loc_x = np.tile(a, r + 1)           # local flat l = b*(r+1) + a
    loc_y = np.repeat(a, r + 1)
    cx = np.tile(np.arange(n), n)       # cell c = cy*n + cx
    cy = np.repeat(np.arange(n), n)
    return ((cy[:, None] * r + loc_y[None, :]) * W
            + cx[:, None] * r + loc_x[None, :])


def build_space(mesh: Mesh, r: int) -> FeSpace:
    """Assemble mass and stiffness for continuous Q_r elements."""
    if r < 1:
        raise ValueError(f"polynomial degree must be >= 1, got {r}")
    n = mesh.cells_per_side
    h = mesh.cell_size
    W = r * n + 1

    # reference element matrices from the 1D equispaced Lagrange basis
    basis = nodal_basis(np.linspace(-1.0, 1.0, r + 1))
    rule = gauss_rule(r + 1)
    V = basis.values_at(rule.nodes)                    # (q, r+1)
    Vd = basis.derivs_at(rule.nodes)
    m1 = (V.T * rule.weights) @ V * (h / 2.0)
    k1 = (Vd.T * rule.weights) @ Vd * (2.0 / h)
    elem_mass = np.kron(m1, m1)                        # y slot first
    elem_stiff = np.kron(m1, k1) + np.kron(k1, m1)

    dofmap = _cell_dofmap(n, r)
    rows = np.broadcast_to(dofmap[:, :, None], dofmap.shape + (dofmap.shape[1],)).ravel()
    cols = np.broadcast_to(dofmap[:, None, :], (dofmap.shape[0],) + (dofmap.shape[1],) * 2).ravel()
    n_cells = n * n

    def scatter(elem):
        data = np.tile(elem.ravel(), n_cells)
        mat = sp.coo_matrix((data, (rows, cols)), shape=(W * W, W * W))
        return mat.tocsr()

    mass_full = scatter(elem_mass)
    stiffness_full = scatter(elem_stiff)

    xs = np.linspace(0.0, 1.0, W)
    ix = np.tile(np.arange(W), W)
    iy = np.repeat(np.arange(W), W)
    inner = (ix > 0) & (ix < W - 1) & (iy > 0) & (iy < W - 1)
    interior_index = np.full(W * W, -1, dtype=int)
    interior_index[inner] = np.arange(inner.sum())
    keep = np.flatnonzero(inner)
    interior_coords = np.column_stack([xs[ix[keep]], xs[iy[keep]]])

    mass = mass_full[keep, :][:, keep].tocsr()
    stiffness = stiffness_full[keep, :][:, keep].tocsr()

    return FeSpace(mesh=mesh, degree=r, lattice_width=W,
                   interior_index=interior_index, interior_coords=interior_coords,
                   mass=mass, stiffness=stiffness,
                   mass_full=mass_full, stiffness_full=stiffness_full,
                   cell_dofmap=dofmap, basis_1d=basis)


def _build_quad_grid(space: FeSpace, q: int) -> QuadGrid:
    mesh = space.mesh
    n = mesh.cells_per_side
    h = mesh.cell_size
    r = space.degree
    rule = gauss_rule(q)
    V = space.basis_1d.values_at(rule.nodes)           # (q, r+1)
    Vd = space.basis_1d.derivs_at(rule.nodes)

    # point p = qy*q + qx inside each cell, cells in dofmap order
    B_loc = np.kron(V, V)                              # (q^2, (r+1)^2)
    Bx_loc = np.kron(V, Vd) * (2.0 / h)
    By_loc = np.kron(Vd, V) * (2.0 / h)
    w_loc = np.kron(rule.weights, rule.weights) * (h / 2.0) ** 2

    cx = np.tile(np.arange(n), n)
    cy = np.repeat(np.arange(n), n)
    xq = (rule.nodes + 1.0) * h / 2.0
    x1 = (cx[:, None] * h + np.tile(xq, q)[None, :]).ravel()
    x2 = (cy[:, None] * h + np.repeat(xq, q)[None, :]).ravel()
    w = np.tile(w_loc, n * n)

    n_cells = n * n
    L = (r + 1) ** 2
    P = n_cells * q * q
    prow = (np.arange(n_cells)[:, None, None] * (q * q)
            + np.arange(q * q)[None, :, None])
    prow = np.broadcast_to(prow, (n_cells, q * q, L)).ravel()
    pcol = np.broadcast_to(space.cell_dofmap[:, None, :], (n_cells, q * q, L)).ravel()

    keep = space.interior_flat

    def to_interior(loc):
        data = np.tile(loc.ravel(), n_cells)
        mat = sp.coo_matrix((data, (prow, pcol)),
                            shape=(P, space.lattice_width ** 2)).tocsc()
        return mat[:, keep].tocsr()

    return QuadGrid(x1=x1, x2=x2, w=w,
                    B=to_interior(B_loc), Bx=to_interior(Bx_loc),
                    By=to_interior(By_loc))


def _value_of(g):
    return g.value if isinstance(g, SpatialFunction) else g


def assemble_load(space: FeSpace, g) -> np.ndarray:
    """Interior load vector b_i = (g, phi_i), with (r+2)^2 Gauss points per cell."""
    grid = space.quad_grid(space.degree + 2)
    vals = _value_of(g)(grid.x1, grid.x2)
    return grid.B.T @ (grid.w * vals)


def _solve_spd(A: sp.csr_matrix, b: np.ndarray, solver: str, tol: float) -> np.ndarray:
    if solver == "cg":
        return cg_solve(A, b, tol=tol)
    if solver == "direct":
        return lu_solve(lu_factor(A), b)
    raise ValueError(f"unknown solver {solver!r}; use 'cg' or 'direct'")


def l2_project(space: FeSpace, g, solver: str = "cg", tol: float = 1e-12) -> np.ndarray:
    """Coefficients of the L2 projection of g onto the interior space."""
    return _solve_spd(space.mass, assemble_load(space, g), solver, tol)


def ritz_project(space: FeSpace, g, solver: str = "cg", tol: float = 1e-12) -> np.ndarray:
    """Coefficients of the elliptic projection: (grad Rg, grad phi) = (grad g, grad phi)."""
    if not isinstance(g, SpatialFunction) or g.gradient is None:
        raise ValueError("ritz_project needs a SpatialFunction with a gradient")
    grid = space.quad_grid(space.degree + 2)
    gx, gy = g.gradient(grid.x1, grid.x2)
    rhs = grid.Bx.T @ (grid.w * gx) + grid.By.T @ (grid.w * gy)
    return _solve_spd(space.stiffness, rhs, solver, tol)


def interpolate(space: FeSpace, g) -> np.ndarray:
    """Nodal interpolation at the interior lattice points."""
    x = space.interior_coords
    return _value_of(g)(x[:, 0], x[:, 1])


def spatial_l2_norm(space: FeSpace, coeffs: np.ndarray, reference=None) -> float:
    """L2 norm of u_h - reference ((r+3)^2 Gauss points; reference None -> 0)."""
    grid = space.quad_grid(space.degree + 3)
    vals = grid.B @ coeffs
    if reference is not None:
        vals = vals - _value_of(reference)(grid.x1, grid.x2)
    return float(np.sqrt(grid.w @ vals ** 2))


def spatial_h1_seminorm(space: FeSpace, coeffs: np.ndarray, grad_reference=None) -> float:
    """H1 seminorm of u_h - reference; reference gradient optional."""
    grid = space.quad_grid(space.degree + 3)
    dx = grid.Bx @ coeffs
    dy = grid.By @ coeffs
    if grad_reference is not None:
        if isinstance(grad_reference, SpatialFunction):
            if grad_reference.gradient is None:
                raise ValueError("reference lacks a gradient")
            gx, gy = grad_reference.gradient(grid.x1, grid.x2)
        else:
            gx, gy = grad_reference(grid.x1, grid.x2)
        dx = dx - gx
        dy = dy - gy
    return float(np.sqrt(grid.w @ (dx ** 2 + dy ** 2)))
