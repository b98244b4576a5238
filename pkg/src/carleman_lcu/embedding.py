"""Zero-padded square-block embedding of the Carleman system.

Each Carleman grade block j (dimension n_x^j) is padded to n_x^alpha with the
original content in the top-left corner, so that A^(e) and L^(e) have
power-of-two dimensions and a tensor-product block structure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import RHO, block_selector, kron_power, realize
from .burgers import (
    GridConfig,
    backward_euler_matrix,
    build_f2,
    carleman_vector,
    diag_block,
    superdiag_block,
)


def _check_pow2(value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or value < 1 or value & (value - 1):
        raise ValueError(f"{name} must be a power of two, got {value!r}")
    return int(value).bit_length() - 1


def commutation_matrix(a: int, b: int) -> sp.csr_matrix:
    """Permutation K^(a,b) with K (x (x) y) = y (x) x for dim x = a, dim y = b."""
    _check_pow2(a, "a")
    _check_pow2(b, "b")
    i, j = np.divmod(np.arange(a * b), b)  # source index i*b + j
    rows = j * a + i
    return sp.csr_matrix((np.ones(a * b), (rows, np.arange(a * b))), shape=(a * b, a * b))


def _projector_power(count: int) -> sp.csr_matrix:
    """rho_0^{(x)count} = |0><0| on count qubits."""
    return realize(kron_power(RHO[0], count))


def _pad_top_left(block: sp.spmatrix, dim: int) -> sp.csr_matrix:
    out = sp.lil_matrix((dim, dim), dtype=complex)
    out[: block.shape[0], : block.shape[1]] = block
    return out.tocsr()


def _check_grade(j: int, lo: int, hi: int) -> None:
    if not lo <= j <= hi:
        raise ValueError(f"block index j={j} outside [{lo}, {hi}]")


def embed_diag_block(j: int, grid: GridConfig) -> sp.csr_matrix:
    """A_j^{(e),j} = rho_0^{(x) s(alpha-j)} (x) A_j^j."""
    _check_grade(j, 1, grid.alpha)
    pad = _projector_power(grid.s * (grid.alpha - j))
    return sp.kron(pad, diag_block(grid, j), format="csr")


def padded_f2(grid: GridConfig) -> sp.csr_matrix:
    """F_2 placed in the top n_x rows of an n_x^2 x n_x^2 matrix."""
    return _pad_top_left(build_f2(grid), grid.n_x**2)


def superdiag_bracket(grid: GridConfig, l: int) -> sp.csr_matrix:
    """(rho_0^{(x)s} (x) K^(n, n^l)) (F2pad (x) I_{n^l}) K^(n^l, n^2), size n^{l+2}.

    Its top n^{l+1} rows equal I_{n^l} (x) F_2 and every other row is zero.
    Labels follow ``commutation_matrix`` (first argument = dimension of the
    left input factor), the transpose of the Magnus-Neudecker labelling.
    """
    n = grid.n_x
    left = sp.kron(_projector_power(grid.s), commutation_matrix(n, n**l), format="csr")
    middle = sp.kron(padded_f2(grid), sp.identity(n**l), format="csr")
    right = commutation_matrix(n**l, n * n)
    return (left @ middle @ right).tocsr()


def embed_superdiag_block(j: int, grid: GridConfig, form: str = "direct") -> sp.csr_matrix:
    """A_{j+1}^{(e),j}, either by direct padding or via the commutation-matrix factorization."""
    _check_grade(j, 1, grid.alpha - 1)
    dim = grid.block_dim
    if form == "direct":
        return _pad_top_left(superdiag_block(grid, j), dim)
    if form != "factored":
        raise ValueError(f"unknown form {form!r}; expected 'direct' or 'factored'")
    n = grid.n_x
    inner = None
    for l in range(j):
        term = sp.kron(superdiag_bracket(grid, l), sp.identity(n ** (j - l - 1)), format="csr")
        inner = term if inner is None else inner + term
    pad = _projector_power(grid.s * (grid.alpha - j - 1))
    return sp.kron(pad, inner, format="csr")


def build_embedded_A(grid: GridConfig, form: str = "direct") -> sp.csr_matrix:
    """A^(e): grade blocks placed by quaternary block selectors."""
    r = grid.r
    total = None
    for j in range(1, grid.alpha + 1):
        sel = realize(block_selector(j - 1, j - 1, r))
        term = sp.kron(sel, embed_diag_block(j, grid), format="csr")
        total = term if total is None else total + term
        if j < grid.alpha:
            sel = realize(block_selector(j - 1, j, r))
            total = total + sp.kron(sel, embed_superdiag_block(j, grid, form), format="csr")
    return total.tocsr()


def embed_vector(y: np.ndarray, grid: GridConfig) -> np.ndarray:
    """Place each Carleman grade of y at the start of its padded block."""
    out = np.zeros(grid.alpha * grid.block_dim, dtype=np.result_type(y, float))
    out[embedded_indices(grid)] = y
    return out


def embedded_indices(grid: GridConfig) -> np.ndarray:
    """Positions of the Delta Carleman unknowns inside one embedded time block."""
    n, N = grid.n_x, grid.block_dim
    return np.concatenate([(j - 1) * N + np.arange(n**j) for j in range(1, grid.alpha + 1)])


def pad_mask(grid: GridConfig) -> np.ndarray:
    """Boolean mask of the z_j (pad) slots in one embedded time block."""
    mask = np.ones(grid.alpha * grid.block_dim, dtype=bool)
    mask[embedded_indices(grid)] = False
    return mask


@dataclass(frozen=True)
class EmbeddedSystem:
    A_e: sp.csr_matrix
    L_e: sp.csr_matrix
    B_e: np.ndarray
    grid: GridConfig

    @property
    def qubit_count(self) -> int:
        return self.L_e.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.L_e.shape[0]


def build_embedded_system(grid: GridConfig, y0: np.ndarray) -> EmbeddedSystem:
    if y0.shape != (grid.carleman_dim,):
        raise ValueError(f"y0 has shape {y0.shape}, expected ({grid.carleman_dim},)")
    A_e = build_embedded_A(grid)
    L_e = backward_euler_matrix(A_e, grid.n_t, grid.dt)
    B_e = np.zeros(L_e.shape[0], dtype=np.result_type(y0, float))
    B_e[: A_e.shape[0]] = embed_vector(y0, grid)
    return EmbeddedSystem(A_e=A_e, L_e=L_e, B_e=B_e, grid=grid)


def build_embedded_from_u0(grid: GridConfig, u0: np.ndarray) -> EmbeddedSystem:
    return build_embedded_system(grid, carleman_vector(u0, grid.alpha))


@dataclass(frozen=True)
class ExtractedSolution:
    u: np.ndarray  # shape (n_t, n_x)
    z_max: float  # largest |z_j| over all time blocks
    z_max_per_step: np.ndarray


def extract_solution(Y_e: np.ndarray, grid: GridConfig) -> ExtractedSolution:
    """u-component of every time block and the magnitude of the pad slots."""
    block = grid.alpha * grid.block_dim
    if Y_e.shape != (grid.n_t * block,):
        raise ValueError(f"Y_e has shape {Y_e.shape}, expected ({grid.n_t * block},)")
    blocks = Y_e.reshape(grid.n_t, block)
    mask = pad_mask(grid)
    z = np.abs(blocks[:, mask]).max(axis=1) if mask.any() else np.zeros(grid.n_t)
    return ExtractedSolution(u=blocks[:, : grid.n_x].copy(), z_max=float(z.max()), z_max_per_step=z)


def restrict(Y_e: np.ndarray, grid: GridConfig) -> np.ndarray:
    """Drop pad slots, giving a vector laid out like the un-embedded Y."""
    block = grid.alpha * grid.block_dim
    idx = embedded_indices(grid)
    return Y_e.reshape(grid.n_t, block)[:, idx].reshape(-1)
