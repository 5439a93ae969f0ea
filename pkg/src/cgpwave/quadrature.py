"""Gauss and Gauss-Lobatto quadrature on [-1, 1] plus nodal Lagrange calculus.

Rules up to four points use closed-form nodes; larger rules fall back on
Newton iteration for the Legendre roots.  The NodalBasis bundle carries the
spectral differentiation matrix used by the time stepper.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class Rule1D:
    """Quadrature rule on [-1, 1]: ascending nodes and positive weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    def integrate(self, f) -> float:
        return float(self.weights @ f(self.nodes))


def _legendre(m: int, x: np.ndarray):
    """Return P_m(x) and P_{m-1}(x) via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if m == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for j in range(2, m + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    return p, p_prev


def _legendre_deriv(m: int, x: np.ndarray):
    """P_m'(x) for |x| < 1, from P_m and P_{m-1}."""
    p, p_prev = _legendre(m, x)
    return m * (x * p - p_prev) / (x * x - 1.0)


def gauss_rule(m: int) -> Rule1D:
    """m-point Gauss-Legendre rule, exact for polynomials of degree 2m-1."""
    if m < 1:
        raise ValueError(f"gauss_rule needs m >= 1, got {m}")
    if m == 1:
        return Rule1D(np.array([0.0]), np.array([2.0]))
    if m == 2:
        a = 1.0 / np.sqrt(3.0)
        return Rule1D(np.array([-a, a]), np.array([1.0, 1.0]))
    if m == 3:
        a = np.sqrt(0.6)
        return Rule1D(np.array([-a, 0.0, a]), np.array([5.0, 8.0, 5.0]) / 9.0)
    if m == 4:
        s = np.sqrt(1.2)
        inner = np.sqrt((3.0 - 2.0 * s) / 7.0)
        outer = np.sqrt((3.0 + 2.0 * s) / 7.0)
        w_in = (18.0 + np.sqrt(30.0)) / 36.0
        w_out = (18.0 - np.sqrt(30.0)) / 36.0
        return Rule1D(np.array([-outer, -inner, inner, outer]),
                      np.array([w_out, w_in, w_in, w_out]))
    # Newton on P_m with Chebyshev-type starting guesses
    i = np.arange(1, m + 1)
    x = np.cos(np.pi * (i - 0.25) / (m + 0.5))
    for _ in range(_NEWTON_MAXIT):
        p, p_prev = _legendre(m, x)
        dp = m * (x * p - p_prev) / (x * x - 1.0)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    dp = _legendre_deriv(m, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return Rule1D(x[order], w[order])


def gauss_lobatto_rule(m: int) -> Rule1D:
    """m-point Gauss-Lobatto rule (endpoints included), exact for degree 2m-3."""
    if m < 2:
        raise ValueError(f"gauss_lobatto_rule needs m >= 2, got {m}")
    if m == 2:
        return Rule1D(np.array([-1.0, 1.0]), np.array([1.0, 1.0]))
    if m == 3:
        return Rule1D(np.array([-1.0, 0.0, 1.0]), np.array([1.0, 4.0, 1.0]) / 3.0)
    if m == 4:
        a = 1.0 / np.sqrt(5.0)
        return Rule1D(np.array([-1.0, -a, a, 1.0]),
                      np.array([1.0, 5.0, 5.0, 1.0]) / 6.0)
    # interior nodes are the roots of P'_{m-1}; Newton with P'' from the ODE
    n = m - 1
    i = np.arange(1, m - 1)
    x = np.cos(np.pi * i / n)
    for _ in range(_NEWTON_MAXIT):
        p, _ = _legendre(n, x)
        dp = _legendre_deriv(n, x)
        d2p = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x)
        dx = dp / d2p
        x -= dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    nodes = np.concatenate(([-1.0], np.sort(x), [1.0]))
    p, _ = _legendre(n, nodes)
    w = 2.0 / (m * n * p * p)
    return Rule1D(nodes, w)


@dataclass(frozen=True)
class NodalBasis:
    """Lagrange cardinal basis on distinct nodes in [-1, 1].

    diff[i][j] = L_j'(x_i) is the spectral differentiation matrix; bary holds
    the barycentric weights 1 / prod_{i != j} (x_j - x_i).
    """

    nodes: np.ndarray
    diff: np.ndarray = field(repr=False)
    bary: np.ndarray = field(repr=False)

    def values_at(self, x):
        """Cardinal values L_j(x), shape (..., n).  Exact at the nodes."""
        x = np.asarray(x, dtype=float)
        n = self.nodes.size
        out = np.ones(x.shape + (n,))
        for j in range(n):
            for i in range(n):
                if i != j:
                    out[..., j] *= (x - self.nodes[i]) / (self.nodes[j] - self.nodes[i])
        return out

    def derivs_at(self, x):
        """Cardinal derivatives L_j'(x), shape (..., n)."""
        x = np.asarray(x, dtype=float)
        n = self.nodes.size
        out = np.zeros(x.shape + (n,))
        for j in range(n):
            for l in range(n):
                if l == j:
                    continue
                term = np.ones(x.shape) / (self.nodes[j] - self.nodes[l])
                for i in range(n):
                    if i != j and i != l:
                        term *= (x - self.nodes[i]) / (self.nodes[j] - self.nodes[i])
                out[..., j] += term
        return out


def nodal_basis(nodes) -> NodalBasis:
    """Build the NodalBasis (barycentric weights and differentiation matrix)."""
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    if n < 1:
        raise ValueError("nodal_basis needs at least one node")
    if np.unique(nodes).size != n:
        raise ValueError("nodal_basis nodes must be distinct")
    diffs = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diffs, 1.0)
    bary = 1.0 / np.prod(diffs, axis=1)
    D = (bary[None, :] / bary[:, None]) / diffs
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -np.sum(D, axis=1))
    return NodalBasis(nodes=nodes, diff=D, bary=bary)


def eval_lagrange(basis: NodalBasis, coeffs, x):
    """Evaluate the interpolant with the given nodal coefficients at x."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != basis.nodes.size:
        raise ValueError(
            f"coefficient count {coeffs.shape[0]} does not match "
            f"{basis.nodes.size} nodes")
    vals = basis.values_at(x) @ coeffs
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(vals) if coeffs.ndim == 1 else vals
    return vals
