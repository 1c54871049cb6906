"""Finite-difference discretization of the QHD Hamiltonian on the unit box.

The discretized operator on ``N`` nodes per axis is::

    H(t) = e^{phi_t} * (-1/2) * sum_i L'_i  +  e^{chi_t} * F

where ``L'`` is the off-diagonal part of the three-point Laplacian (the
``-2/h^2`` diagonal is a global phase and is dropped) and ``F`` is diagonal
with the objective sampled on the grid. State ordering is C order over the
grid multi-index ``(k_1, ..., k_n)``, so variable 0 is the slowest axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .expr import Expr, evaluate_univariate
from .problem import Problem
from .schedule import Schedule

__all__ = [
    "Grid",
    "DiscretizedHamiltonian",
    "CapExceeded",
    "kinetic_offdiag",
    "potential_diag",
    "assemble_discretized",
    "materialize",
    "materialize_sparse",
    "dump_matrix",
    "load_matrix",
]

DEFAULT_CAP = 2**20


class CapExceeded(ValueError):
    """Requested operator or state exceeds the configured dimension cap."""


@dataclass(frozen=True)
class Grid:
    N: int

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("need at least 3 grid points")

    @property
    def h(self) -> float:
        return 1.0 / (self.N - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N) * self.h


def kinetic_offdiag(grid: Grid) -> np.ndarray:
    """Tridiagonal ``L'`` with ``1/h^2`` on both off-diagonals and zero diagonal."""
    N = grid.N
    L = np.zeros((N, N))
    idx = np.arange(N - 1)
    L[idx, idx + 1] = L[idx + 1, idx] = 1.0 / grid.h**2
    return L


def potential_diag(g: Expr, grid: Grid) -> np.ndarray:
    """``g`` sampled at the grid nodes ``k*h``."""
    return evaluate_univariate(g, grid.nodes)


@dataclass(frozen=True, eq=False)
class DiscretizedHamiltonian:
    n: int
    grid: Grid
    kinetic: np.ndarray
    univariate: tuple[tuple[int, Expr, np.ndarray], ...]
    bivariate: tuple[tuple[int, int, Expr, Expr, np.ndarray, np.ndarray], ...]
    constant: float = 0.0

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def dim(self) -> int:
        return self.N**self.n

    @cached_property
    def potential_tensor(self) -> np.ndarray:
        """Diagonal of ``F`` as an ``(N,)*n`` array."""
        shape = (self.N,) * self.n
        V = np.full(shape, float(self.constant))
        for i, _, vec in self.univariate:
            V += _along(vec, i, self.n)
        for k, l, _, _, pv, qv in self.bivariate:
            V += _along(pv, k, self.n) * _along(qv, l, self.n)
        V.setflags(write=False)
        return V


def _along(vec: np.ndarray, axis: int, n: int) -> np.ndarray:
    shape = [1] * n
    shape[axis] = vec.shape[0]
    return vec.reshape(shape)


def assemble_discretized(p: Problem, N: int) -> DiscretizedHamiltonian:
    """Sample a unit-box problem on ``N`` nodes per axis."""
    if not p.bounds.is_unit:
        raise ValueError("problem must be normalized to the unit box first")
    grid = Grid(N)
    obj = p.objective
    uni = tuple((i, g, potential_diag(g, grid)) for i, g in obj.univariate)
    bi = tuple(
        (k, l, pe, qe, potential_diag(pe, grid), potential_diag(qe, grid))
        for k, l, pe, qe in obj.bivariate
    )
    return DiscretizedHamiltonian(obj.n, grid, kinetic_offdiag(grid), uni, bi, obj.constant)


def materialize_sparse(
    dh: DiscretizedHamiltonian, schedule: Schedule, t: float, cap: int = DEFAULT_CAP
) -> sp.csr_matrix:
    if dh.dim > cap:
        raise CapExceeded(f"dimension {dh.dim} exceeds cap {cap}")
    a, b = schedule.coefficients(t)
    N, n = dh.N, dh.n
    K = sp.csr_matrix(dh.kinetic)
    total = sp.csr_matrix((dh.dim, dh.dim))
    for i in range(n):
        left = sp.identity(N**i, format="csr")
        right = sp.identity(N ** (n - 1 - i), format="csr")
        total = total + sp.kron(sp.kron(left, K), right, format="csr")
    H = (-0.5 * a) * total + sp.diags(b * dh.potential_tensor.ravel())
    return H.tocsr()


def materialize(
    dh: DiscretizedHamiltonian, schedule: Schedule, t: float, cap: int = DEFAULT_CAP
) -> np.ndarray:
    """Dense ``H(t)``; use :func:`materialize_sparse` beyond a few thousand states."""
    return materialize_sparse(dh, schedule, t, cap).toarray()


def dump_matrix(path, M: np.ndarray) -> None:
    """Write a square matrix as an int64 dimension header plus float64 row-major data."""
    M = np.ascontiguousarray(M, dtype="<f8")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    with open(path, "wb") as fh:
        fh.write(np.int64(M.shape[0]).astype("<i8").tobytes())
        fh.write(M.tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        d = int(np.frombuffer(fh.read(8), dtype="<i8")[0])
        data = np.frombuffer(fh.read(), dtype="<f8")
    return data.reshape(d, d).copy()
