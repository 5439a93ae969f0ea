"""Manufactured wave-equation benchmarks on the unit square.

Each problem carries the closed-form solution, its time derivative and
gradient, the matching right-hand side f, and the initial fields with
gradients (needed by the elliptic projection).  All callables broadcast
over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fem import SpatialFunction

PI = np.pi


@dataclass(frozen=True)
class WaveProblem:
    """Data of u_tt - Laplace(u) = f with homogeneous Dirichlet values."""

    id: str
    exact_u: Callable
    exact_dtu: Callable
    exact_grad: Callable
    rhs_f: Callable
    u0: SpatialFunction
    u1: SpatialFunction
    T: float = 1.0


def _zero_field() -> SpatialFunction:
    return SpatialFunction(
        value=lambda x1, x2: np.zeros(np.broadcast(x1, x2).shape),
        gradient=lambda x1, x2: (np.zeros(np.broadcast(x1, x2).shape),
                                 np.zeros(np.broadcast(x1, x2).shape)))


def problem_poly() -> WaveProblem:
    """Separable solution sin(4 pi t) x1(x1-1) x2(x2-1); biquadratic in space."""

    def q1(x):
        return x * (x - 1.0)

    def u(x1, x2, t):
        return np.sin(4 * PI * t) * q1(x1) * q1(x2)

    def dtu(x1, x2, t):
        return 4 * PI * np.cos(4 * PI * t) * q1(x1) * q1(x2)

    def grad(x1, x2, t):
        s = np.sin(4 * PI * t)
        return s * (2 * x1 - 1.0) * q1(x2), s * q1(x1) * (2 * x2 - 1.0)

    def f(x1, x2, t):
        return -np.sin(4 * PI * t) * (16 * PI ** 2 * q1(x1) * q1(x2)
                                      + 2 * q1(x1) + 2 * q1(x2))

    u1 = SpatialFunction(
        value=lambda x1, x2: 4 * PI * q1(x1) * q1(x2),
        gradient=lambda x1, x2: (4 * PI * (2 * x1 - 1.0) * q1(x2),
                                 4 * PI * q1(x1) * (2 * x2 - 1.0)))
    return WaveProblem(id="poly", exact_u=u, exact_dtu=dtu, exact_grad=grad,
                       rhs_f=f, u0=_zero_field(), u1=u1)


def problem_trig() -> WaveProblem:
    """Solution sin(4 pi t) sin(2 pi x1) sin(2 pi x2); f = -8 pi^2 u."""

    def u(x1, x2, t):
        return np.sin(4 * PI * t) * np.sin(2 * PI * x1) * np.sin(2 * PI * x2)

    def dtu(x1, x2, t):
        return 4 * PI * np.cos(4 * PI * t) * np.sin(2 * PI * x1) * np.sin(2 * PI * x2)

    def grad(x1, x2, t):
        s = 2 * PI * np.sin(4 * PI * t)
        return (s * np.cos(2 * PI * x1) * np.sin(2 * PI * x2),
                s * np.sin(2 * PI * x1) * np.cos(2 * PI * x2))

    def f(x1, x2, t):
        return -8 * PI ** 2 * u(x1, x2, t)

    u1 = SpatialFunction(
        value=lambda x1, x2: 4 * PI * np.sin(2 * PI * x1) * np.sin(2 * PI * x2),
        gradient=lambda x1, x2: (8 * PI ** 2 * np.cos(2 * PI * x1) * np.sin(2 * PI * x2),
                                 8 * PI ** 2 * np.sin(2 * PI * x1) * np.cos(2 * PI * x2)))
    return WaveProblem(id="trig", exact_u=u, exact_dtu=dtu, exact_grad=grad,
                       rhs_f=f, u0=_zero_field(), u1=u1)


def problem_energy() -> WaveProblem:
    """Free oscillation of the first Laplace eigenfunction; f = 0.

    The continuous energy |u_t|^2 + |grad u|^2 is constant, pi^2/2.
    """
    om = np.sqrt(2.0) * PI

    def u(x1, x2, t):
        return np.cos(om * t) * np.sin(PI * x1) * np.sin(PI * x2)

    def dtu(x1, x2, t):
        return -om * np.sin(om * t) * np.sin(PI * x1) * np.sin(PI * x2)

    def grad(x1, x2, t):
        c = PI * np.cos(om * t)
        return (c * np.cos(PI * x1) * np.sin(PI * x2),
                c * np.sin(PI * x1) * np.cos(PI * x2))

    def f(x1, x2, t):
        return np.zeros(np.broadcast(x1, x2, t).shape)

    u0 = SpatialFunction(
        value=lambda x1, x2: np.sin(PI * x1) * np.sin(PI * x2),
        gradient=lambda x1, x2: (PI * np.cos(PI * x1) * np.sin(PI * x2),
                                 PI * np.sin(PI * x1) * np.cos(PI * x2)))
    return WaveProblem(id="energy", exact_u=u, exact_dtu=dtu, exact_grad=grad,
                       rhs_f=f, u0=u0, u1=_zero_field())


_REGISTRY = {"poly": problem_poly, "trig": problem_trig, "energy": problem_energy}


def get_problem(pid: str) -> WaveProblem:
    """Look up a benchmark by id: 'poly', 'trig', or 'energy'."""
    try:
        return _REGISTRY[pid]()
    except KeyError:
        raise ValueError(f"unknown problem id {pid!r}; "
                         f"known: {sorted(_REGISTRY)}") from None
