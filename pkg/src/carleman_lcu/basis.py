"""Single-qubit operator sets, quaternary block addressing and Kronecker realization.

Operator naming follows the mixed decomposition literature:

* ``RHO0..RHO3`` are the single-entry matrices |0><0|, |0><1|, |1><0|, |1><1|
  and ``RHO4`` is the 2x2 identity.
* ``SIGMA0..SIGMA3`` are X, Y, Z and I **in that order**. This is not the
  usual sigma_0 = I convention; exported Pauli strings elsewhere in the
  package use the letters I/X/Y/Z to avoid confusion.
* ``TAU0..TAU3`` coincide with ``RHO0..RHO3`` as matrices.

Tensor ordering: the leftmost factor of a factor list is the most
significant qubit, which is qubit 0 in circuit listings.
"""
from __future__ import annotations

import enum
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

DEFAULT_CAP = 2**16


class DimensionCapError(ValueError):
    """A realization would exceed the configured dimension cap."""


class Basis(enum.Enum):
    RHO0 = ("rho", 0)
    RHO1 = ("rho", 1)
    RHO2 = ("rho", 2)
    RHO3 = ("rho", 3)
    RHO4 = ("rho", 4)
    SIGMA0 = ("sigma", 0)
    SIGMA1 = ("sigma", 1)
    SIGMA2 = ("sigma", 2)
    SIGMA3 = ("sigma", 3)
    TAU0 = ("tau", 0)
    TAU1 = ("tau", 1)
    TAU2 = ("tau", 2)
    TAU3 = ("tau", 3)

    @property
    def family(self) -> str:
        return self.value[0]

    @property
    def index(self) -> int:
        return self.value[1]

    @property
    def width(self) -> int:
        return 1

    @property
    def in_p(self) -> bool:
        """Member of the mixed set P = {rho_0, ..., rho_4}."""
        return self.family == "rho"

    def dense(self) -> np.ndarray:
        return _DENSE[self].copy()

    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix(_DENSE[self])

    def __repr__(self) -> str:
        return f"{self.family}{self.index}"


RHO = (Basis.RHO0, Basis.RHO1, Basis.RHO2, Basis.RHO3, Basis.RHO4)
SIGMA = (Basis.SIGMA0, Basis.SIGMA1, Basis.SIGMA2, Basis.SIGMA3)
TAU = (Basis.TAU0, Basis.TAU1, Basis.TAU2, Basis.TAU3)

_single = [np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]]),
           np.array([[0, 0], [1, 0]]), np.array([[0, 0], [0, 1]])]
_DENSE: dict[Basis, np.ndarray] = {}
for _k, _m in enumerate(_single):
    _DENSE[RHO[_k]] = _m.astype(complex)
    _DENSE[TAU[_k]] = _m.astype(complex)
_DENSE[Basis.RHO4] = np.eye(2, dtype=complex)
_DENSE[Basis.SIGMA0] = np.array([[0, 1], [1, 0]], dtype=complex)
_DENSE[Basis.SIGMA1] = np.array([[0, -1j], [1j, 0]], dtype=complex)
_DENSE[Basis.SIGMA2] = np.array([[1, 0], [0, -1]], dtype=complex)
_DENSE[Basis.SIGMA3] = np.eye(2, dtype=complex)


def rho_bar(factor: Basis) -> Basis:
    """Single-qubit unitary completion of an element of P."""
    if not factor.in_p:
        raise ValueError(f"rho_bar is defined on P only, got {factor!r}")
    return Basis.SIGMA0 if factor in (Basis.RHO1, Basis.RHO2) else Basis.SIGMA3


def rho_gram(factor: Basis) -> Basis:
    """rho rho^T, which always lands in {rho_0, rho_3, rho_4}."""
    if not factor.in_p:
        raise ValueError(f"expected an element of P, got {factor!r}")
    return {0: Basis.RHO0, 1: Basis.RHO0, 2: Basis.RHO3, 3: Basis.RHO3, 4: Basis.RHO4}[factor.index]


def _as_bits(value: int | str, width: int | None) -> str:
    if isinstance(value, str):
        if value and set(value) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {value!r}")
        return value
    if width is None:
        raise ValueError("integer indices need an explicit width")
    if value < 0 or value >= 2**width:
        raise ValueError(f"index {value} does not fit in {width} bits")
    return format(value, f"0{width}b") if width else ""


def quaternary_index(i: int | str, j: int | str, width: int | None = None) -> str:
    """Quaternary string f with digits f_k = 2 i_k + j_k, most significant first.

    ``i`` and ``j`` are equal-length bitstrings, or integers together with
    ``width`` (the number of binary digits, log2 of the block count).
    """
    bi, bj = _as_bits(i, width), _as_bits(j, width)
    if len(bi) != len(bj):
        raise ValueError(f"bitstrings differ in length: {bi!r} vs {bj!r}")
    return "".join(str(2 * int(a) + int(b)) for a, b in zip(bi, bj))


def block_selector(i: int, j: int, width: int) -> tuple[Basis, ...]:
    """Factor list that selects block (i, j) of a 2^width x 2^width block matrix."""
    return tuple(RHO[int(d)] for d in quaternary_index(i, j, width))


def factor_width(factor) -> int:
    return factor.width


def total_width(factors: Iterable) -> int:
    return sum(f.width for f in factors)


def realize(factors: Sequence, cap: int = DEFAULT_CAP) -> sp.csr_matrix:
    """Kronecker product of the factor realizations in listed order.

    Every factor must expose ``width`` and ``matrix()``. An empty list
    realizes as the 1x1 identity.
    """
    dim = 2 ** total_width(factors)
    if dim > cap:
        raise DimensionCapError(f"realization of dimension {dim} exceeds cap {cap}")
    mats = [f.matrix() for f in factors]
    if not mats:
        return sp.identity(1, dtype=complex, format="csr")
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats).tocsr()


def kron_power(factor: Basis, count: int) -> tuple[Basis, ...]:
    return (factor,) * count
