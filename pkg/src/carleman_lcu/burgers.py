"""Discretized periodic Burgers' equation and its truncated Carleman linearization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DENSE_SOLVE_LIMIT = 2**14


class ConfigError(ValueError):
    """Invalid discretization or run parameters."""


class SingularSystemError(np.linalg.LinAlgError):
    """The backward-Euler system could not be solved."""


def _log2_exact(value: int, name: str, minimum: int) -> int:
    if not isinstance(value, (int, np.integer)) or value < 1 or value & (value - 1):
        raise ConfigError(f"{name} must be a power of two, got {value!r}")
    k = int(value).bit_length() - 1
    if k < minimum:
        raise ConfigError(f"{name} must be at least {2**minimum}, got {value}")
    return k


@dataclass(frozen=True)
class GridConfig:
    """Spatial/temporal discretization and physics parameters.

    ``dx`` defaults to ``L_x / (n_x - 1)``.
    """

    n_x: int
    n_t: int
    dt: float
    nu: float = 1.0
    alpha: int = 2
    L_x: float = 2 * math.pi
    dx: float | None = field(default=None)

    def __post_init__(self):
        _log2_exact(self.n_x, "n_x", 2)
        _log2_exact(self.n_t, "n_t", 1)
        _log2_exact(self.alpha, "alpha", 0)
        if self.dt < 0:
            raise ConfigError(f"dt must be non-negative, got {self.dt}")
        if self.nu <= 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if self.dx is None:
            if self.L_x <= 0:
                raise ConfigError(f"L_x must be positive, got {self.L_x}")
            object.__setattr__(self, "dx", self.L_x / (self.n_x - 1))
        elif self.dx <= 0:
            raise ConfigError(f"dx must be positive, got {self.dx}")

    @property
    def s(self) -> int:
        return self.n_x.bit_length() - 1

    @property
    def m(self) -> int:
        return self.n_t.bit_length() - 1

    @property
    def r(self) -> int:
        return self.alpha.bit_length() - 1

    @property
    def carleman_dim(self) -> int:
        """Delta = sum_{j=1}^alpha n_x^j."""
        return sum(self.n_x**j for j in range(1, self.alpha + 1))

    @property
    def block_dim(self) -> int:
        """Padded grade-block size n_x^alpha."""
        return self.n_x**self.alpha

    @property
    def embedded_dim(self) -> int:
        return self.alpha * self.n_t * self.block_dim

    @property
    def system_qubits(self) -> int:
        return self.m + self.r + self.s * self.alpha

    def grid_points(self) -> np.ndarray:
        return np.arange(self.n_x) * self.dx


@dataclass(frozen=True)
class CarlemanSystem:
    A: sp.csr_matrix
    L: sp.csr_matrix
    B: np.ndarray
    y0: np.ndarray
    grid: GridConfig


def build_f1(grid: GridConfig) -> sp.csr_matrix:
    """Periodic second-difference operator scaled by nu / dx^2."""
    n = grid.n_x
    c = grid.nu / grid.dx**2
    rows, cols, vals = [], [], []
    for j in range(n):
        for off, v in ((-1, 1.0), (0, -2.0), (1, 1.0)):
            rows.append(j)
            cols.append((j + off) % n)
            vals.append(c * v)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def build_f2(grid: GridConfig) -> sp.csr_matrix:
    """Advection operator with (F2 (u x u))_j = -u_j (u_{j+1} - u_{j-1}) / (2 dx)."""
    n = grid.n_x
    c = -1.0 / (2 * grid.dx)
    rows, cols, vals = [], [], []
    for j in range(n):
        rows += [j, j]
        cols += [j * n + (j + 1) % n, j * n + (j - 1) % n]
        vals += [c, -c]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n * n))


def _identity(dim: int) -> sp.csr_matrix:
    return sp.identity(dim, format="csr")


def _sum_of_placements(op: sp.spmatrix, n: int, j: int) -> sp.csr_matrix:
    """sum_{l=0}^{j-1} I_n^{(x)l} (x) op (x) I_n^{(x)(j-l-1)}."""
    total = None
    for l in range(j):
        term = sp.kron(sp.kron(_identity(n**l), op), _identity(n ** (j - l - 1)), format="csr")
        total = term if total is None else total + term
    return total.tocsr()


def diag_block(grid: GridConfig, j: int) -> sp.csr_matrix:
    """A_j^j, of shape n_x^j x n_x^j."""
    return _sum_of_placements(build_f1(grid), grid.n_x, j)


def superdiag_block(grid: GridConfig, j: int) -> sp.csr_matrix:
    """A_{j+1}^j, of shape n_x^j x n_x^{j+1}."""
    return _sum_of_placements(build_f2(grid), grid.n_x, j)


def build_carleman_A(grid: GridConfig) -> sp.csr_matrix:
    alpha = grid.alpha
    blocks = [[None] * alpha for _ in range(alpha)]
    for j in range(1, alpha + 1):
        blocks[j - 1][j - 1] = diag_block(grid, j)
        if j < alpha:
            blocks[j - 1][j] = superdiag_block(grid, j)
    return sp.bmat(blocks, format="csr")


def carleman_vector(u: np.ndarray, alpha: int) -> np.ndarray:
    """(u, u^{(x)2}, ..., u^{(x)alpha}) stacked."""
    parts, power = [], np.ones(1)
    for _ in range(alpha):
        power = np.kron(power, u)
        parts.append(power)
    return np.concatenate(parts)


def backward_euler_matrix(A: sp.spmatrix, n_t: int, dt: float) -> sp.csr_matrix:
    """Block lower-bidiagonal [[I], [-I, M], ..., [-I, M]] with M = I - dt A."""
    dim = A.shape[0]
    eye = _identity(dim)
    M = (eye - dt * A).tocsr()
    diag = sp.block_diag([eye] + [M] * (n_t - 1), format="csr")
    sub = sp.kron(sp.eye(n_t, k=-1), eye, format="csr")
    return (diag - sub).tocsr()


def build_time_system(A: sp.spmatrix, grid: GridConfig, y0: np.ndarray) -> CarlemanSystem:
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    if y0.shape != (A.shape[0],):
        raise ValueError(f"y0 has length {y0.shape}, expected {A.shape[0]}")
    L = backward_euler_matrix(A, grid.n_t, grid.dt)
    B = np.zeros(grid.n_t * A.shape[0], dtype=np.result_type(y0, float))
    B[: A.shape[0]] = y0
    return CarlemanSystem(A=sp.csr_matrix(A), L=L, B=B, y0=np.asarray(y0), grid=grid)


def initial_state(grid: GridConfig, sigma: float = 0.5, mu: float = math.pi) -> np.ndarray:
    """Gaussian u(x, 0) = exp(-(x - mu)^2 / (2 sigma^2)) / (sqrt(2 pi) sigma^2) at the nodes."""
    if sigma == 0:
        raise ValueError("sigma must be non-zero")
    x = grid.grid_points()
    return np.exp(-((x - mu) ** 2) / (2 * sigma**2)) / (math.sqrt(2 * math.pi) * sigma**2)


def build_carleman_system(grid: GridConfig, u0: np.ndarray) -> CarlemanSystem:
    return build_time_system(build_carleman_A(grid), grid, carleman_vector(u0, grid.alpha))


def classical_solve(L: sp.spmatrix, B: np.ndarray) -> np.ndarray:
    """Direct solve of L Y = B (dense LU below 2^14 unknowns, sparse LU above)."""
    if L.shape[0] != L.shape[1] or L.shape[0] != B.shape[0]:
        raise ValueError(f"shape mismatch: L {L.shape}, B {B.shape}")
    dtype = np.result_type(L.dtype, B.dtype)
    try:
        if L.shape[0] <= DENSE_SOLVE_LIMIT:
            Y = np.linalg.solve(L.toarray().astype(dtype), B.astype(dtype))
        else:
            Y = spla.spsolve(sp.csc_matrix(L, dtype=dtype), B.astype(dtype))
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(Y)):
        raise SingularSystemError("solution contains non-finite entries")
    residual = np.max(np.abs(L @ Y - B))
    scale = max(np.max(np.abs(B)), np.finfo(float).tiny)
    if residual > 1e-10 * scale:
        raise SingularSystemError(f"residual {residual:.3e} too large; L is singular or ill-conditioned")
    return Y


def carleman_trajectory(Y: np.ndarray, grid: GridConfig) -> np.ndarray:
    """u-component of each time block of an un-embedded solution, shape (n_t, n_x)."""
    delta = grid.carleman_dim
    return np.stack([Y[t * delta: t * delta + grid.n_x] for t in range(grid.n_t)])
