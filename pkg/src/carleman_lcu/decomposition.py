"""Term-by-term decomposition of the embedded system matrix L^(e).

L^(e) = L_1 - dt * L_2 with L_2 = (rho_4^{(x)m} - rho_0^{(x)m}) (x) A^(e).

* ``L1`` terms come from the time-stepping structure (I on the diagonal,
  -I on the subdiagonal).
* ``L2a`` terms come from the block-diagonal part of A^(e), built from the
  2s+3 element decomposition of F_1 over the mixed set.
* ``L2b`` terms come from the superdiagonal part, kept as structured
  products of commutation matrices and the D * P^(+/-) factorization of F_2.

Every term factor realizes to a 0/1 matrix; all scalars live in the term
coefficient.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

from . import kernels
from .basis import DEFAULT_CAP, RHO, Basis, DimensionCapError, block_selector, realize, total_width
from .burgers import GridConfig
from .circuits import (
    Circuit,
    circuit_to_matrix,
    commutation_circuit,
    p1_circuit,
    p2_minus_circuit,
    p2_plus_circuit,
    p_minus_circuit,
    p_plus_circuit,
)
from .embedding import commutation_matrix

CLASSES = ("L1", "L2a", "L2b")
# count quoted for (n_x, n_t, alpha) = (4, 4, 2) in the literature; the
# closed form and the enumeration both give 49 (see README)
LITERATURE_COUNT_442 = 73
PAULI_CAP_QUBITS = 10

_PERMUTATION_KINDS = ("P+", "P-", "P1", "P2+", "P2-")


@dataclass(frozen=True)
class CompositeBlock:
    """Named multi-qubit factor: D, P+/P-, P1, P2+/P2-, K(a, b) or an identity.

    ``size`` is s = log2 n_x for D and the P family, the pair (a, b) for K
    and the qubit count for I.
    """

    kind: str
    size: Union[int, tuple]

    def __post_init__(self):
        if self.kind in ("D",) + _PERMUTATION_KINDS:
            if not isinstance(self.size, int) or self.size < 2:
                raise ValueError(f"{self.kind} needs s >= 2, got {self.size!r}")
        elif self.kind == "K":
            a, b = self.size
            for v in (a, b):
                if v < 1 or v & (v - 1):
                    raise ValueError(f"K dimensions must be powers of two, got {self.size}")
            object.__setattr__(self, "size", (int(a), int(b)))
        elif self.kind == "I":
            if not isinstance(self.size, int) or self.size < 0:
                raise ValueError(f"identity width must be >= 0, got {self.size!r}")
        else:
            raise ValueError(f"unknown composite kind {self.kind!r}")

    @property
    def width(self) -> int:
        if self.kind == "K":
            a, b = self.size
            return (a * b).bit_length() - 1
        if self.kind == "I":
            return self.size
        return 2 * self.size

    def circuit(self) -> Circuit:
        """Permutation circuit for P, K and I blocks (D is not unitary)."""
        builders = {"P+": p_plus_circuit, "P-": p_minus_circuit, "P1": p1_circuit,
                    "P2+": p2_plus_circuit, "P2-": p2_minus_circuit}
        if self.kind in builders:
            return builders[self.kind](self.size)
        if self.kind == "K":
            return commutation_circuit(*self.size)
        if self.kind == "I":
            return Circuit(self.size)
        raise ValueError("D has no unitary circuit")

    def matrix(self) -> sp.csr_matrix:
        if self.kind == "D":
            return realize((RHO[0],) * self.size + (RHO[4],) * self.size)
        if self.kind == "K":
            return commutation_matrix(*self.size).astype(complex)
        if self.kind == "I":
            return sp.identity(1 << self.size, dtype=complex, format="csr")
        return circuit_to_matrix(self.circuit()).real.astype(complex)

    def to_dict(self) -> dict:
        if self.kind == "K":
            return {"kind": "K", "a": self.size[0], "b": self.size[1]}
        if self.kind == "I":
            return {"kind": "I", "width": self.size}
        return {"kind": self.kind, "s": self.size}

    def __repr__(self) -> str:
        if self.kind == "K":
            return f"K{self.size}"
        return f"{self.kind}[{self.size}]"


@dataclass(frozen=True)
class Product:
    """Matrix product of equal-width factor lists, leftmost operand applied last."""

    operands: tuple

    def __post_init__(self):
        ops = tuple(tuple(o) for o in self.operands)
        if not ops:
            raise ValueError("empty product")
        widths = {total_width(o) for o in ops}
        if len(widths) != 1:
            raise ValueError(f"product operands have different widths {sorted(widths)}")
        object.__setattr__(self, "operands", ops)

    @property
    def width(self) -> int:
        return total_width(self.operands[0])

    def matrix(self) -> sp.csr_matrix:
        return reduce(lambda a, b: (a @ b).tocsr(), (realize(o) for o in self.operands))

    def to_dict(self) -> dict:
        return {"kind": "product", "operands": [[factor_to_dict(f) for f in o] for o in self.operands]}

    def __repr__(self) -> str:
        return "(" + ")·(".join("⊗".join(map(repr, o)) for o in self.operands) + ")"


Factor = Union[Basis, CompositeBlock, Product]


def factor_to_dict(f: Factor) -> dict:
    if isinstance(f, Basis):
        return {"kind": f.family, "index": f.index}
    return f.to_dict()


def factor_from_dict(d: dict) -> Factor:
    kind = d["kind"]
    if kind in ("rho", "sigma", "tau"):
        return Basis((kind, int(d["index"])))
    if kind == "product":
        return Product(tuple(tuple(factor_from_dict(x) for x in o) for o in d["operands"]))
    if kind == "K":
        return CompositeBlock("K", (int(d["a"]), int(d["b"])))
    if kind == "I":
        return CompositeBlock("I", int(d["width"]))
    return CompositeBlock(kind, int(d["s"]))


@dataclass(frozen=True)
class DecompositionTerm:
    coefficient: complex
    factors: tuple
    term_class: str
    j: int = 0
    l: int = 0
    sub: int = 0
    time: int = 0
    label: str = ""

    def __post_init__(self):
        if self.term_class not in CLASSES:
            raise ValueError(f"unknown term class {self.term_class!r}")
        object.__setattr__(self, "factors", tuple(f for f in self.factors if f.width > 0))
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def width(self) -> int:
        return total_width(self.factors)

    @property
    def sort_key(self) -> tuple:
        return (CLASSES.index(self.term_class), self.j, self.l, self.sub, self.time)

    def realize(self, cap: int = DEFAULT_CAP) -> sp.csr_matrix:
        return realize(self.factors, cap)

    def scaled(self, factor: complex) -> "DecompositionTerm":
        return DecompositionTerm(self.coefficient * factor, self.factors, self.term_class,
                                 self.j, self.l, self.sub, self.time, self.label)

    def to_dict(self) -> dict:
        return {
            "coeff": [self.coefficient.real, self.coefficient.imag],
            "class": self.term_class,
            "j": self.j, "l": self.l, "sub": self.sub, "time": self.time,
            "label": self.label,
            "factors": [factor_to_dict(f) for f in self.factors],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecompositionTerm":
        re, im = d["coeff"]
        return cls(complex(re, im), tuple(factor_from_dict(f) for f in d["factors"]), d["class"],
                   d.get("j", 0), d.get("l", 0), d.get("sub", 0), d.get("time", 0), d.get("label", ""))

    def __repr__(self) -> str:
        return f"{self.term_class}({self.coefficient:.4g}: {'⊗'.join(map(repr, self.factors))})"


def _rho(k: int, count: int = 1) -> tuple:
    return (RHO[k],) * count


def _ident(width: int) -> tuple:
    return (CompositeBlock("I", width),) if width > 0 else ()


# --- L1 ---------------------------------------------------------------------

def time_shift_terms(m: int) -> list[tuple]:
    """Factor lists whose sum is the n_t x n_t lower shift (ones on the subdiagonal)."""
    out = []
    for j in range(1, m + 1):
        out.append(_rho(4, j - 1) + _rho(2) + _rho(1, m - j))
    return out


def decompose_L1(grid: GridConfig) -> list[DecompositionTerm]:
    """log2(n_t) + 1 terms: rho_4^{(x)m} minus the shift pieces, each tensored with identity."""
    rest = grid.r + grid.s * grid.alpha
    terms = [DecompositionTerm(1.0, _rho(4, grid.m) + _ident(rest), "L1", sub=0, label="identity")]
    for k, fl in enumerate(time_shift_terms(grid.m), start=1):
        terms.append(DecompositionTerm(-1.0, fl + _ident(rest), "L1", sub=k, label=f"shift{k}"))
    return terms


# --- F1 and L2a -------------------------------------------------------------

def f1_factor_lists(s: int) -> list[tuple[float, tuple]]:
    """(weight, factor list) pairs with sum weight * realize = F_1 * dx^2 / nu."""
    out = [(-2.0, _rho(4, s)),
           (1.0, _rho(4, s - 1) + _rho(1)),
           (1.0, _rho(4, s - 1) + _rho(2)),
           (1.0, _rho(1, s)),
           (1.0, _rho(2, s))]
    for i in range(2, s + 1):
        out.append((1.0, _rho(4, i - 2) + _rho(2) + _rho(1, s - i + 1)))
        out.append((1.0, _rho(4, i - 2) + _rho(1) + _rho(2, s - i + 1)))
    return out


def decompose_F1(grid: GridConfig) -> list[DecompositionTerm]:
    """2s + 3 terms over the mixed set summing to F_1."""
    scale = grid.nu / grid.dx**2
    return [DecompositionTerm(scale * w, fl, "L2a", sub=k)
            for k, (w, fl) in enumerate(f1_factor_lists(grid.s))]


_TIME_SIGNS = (1.0, -1.0)  # rho_4^{(x)m}, then rho_0^{(x)m}


def _time_factor(m: int, t: int) -> tuple:
    return _rho(4, m) if t == 0 else _rho(0, m)


def decompose_L2a(grid: GridConfig) -> list[DecompositionTerm]:
    """alpha(alpha+1)(2s+3) terms realizing (rho_4^m - rho_0^m) (x) diag part of A^(e)."""
    s, alpha = grid.s, grid.alpha
    scale = grid.nu / grid.dx**2
    f1 = f1_factor_lists(s)
    terms = []
    for j in range(1, alpha + 1):
        sel = block_selector(j - 1, j - 1, grid.r)
        pad = _rho(0, s * (alpha - j))
        for l in range(j):
            for k, (w, fl) in enumerate(f1):
                body = sel + pad + _ident(s * l) + fl + _ident(s * (j - l - 1))
                for t, sign in enumerate(_TIME_SIGNS):
                    terms.append(DecompositionTerm(sign * scale * w, _time_factor(grid.m, t) + body,
                                                   "L2a", j=j, l=l, sub=k, time=t))
    return terms


# --- F2 and L2b -------------------------------------------------------------

@dataclass(frozen=True)
class F2Factorization:
    D: CompositeBlock
    P_plus: CompositeBlock
    P_minus: CompositeBlock
    coefficients: tuple  # weights of D*P+ and D*P- in the padded F_2

    def padded(self) -> sp.csr_matrix:
        d = self.D.matrix()
        cp, cm = self.coefficients
        return (cp * (d @ self.P_plus.matrix()) + cm * (d @ self.P_minus.matrix())).tocsr()


def factor_F2(grid: GridConfig) -> F2Factorization:
    """Padded F_2 = -(D P^+ - D P^-) / (2 dx)."""
    s = grid.s
    c = 1.0 / (2 * grid.dx)
    return F2Factorization(CompositeBlock("D", s), CompositeBlock("P+", s), CompositeBlock("P-", s), (-c, c))


def l2b_bracket(s: int, l: int, sign: str) -> Product:
    """(rho_0^s (x) K^(n, n^l)) (D (x) I) (P (x) I) K^(n^l, n^2) on (l+2)s qubits.

    Trivial commutation matrices (l = 0) are written as identities.
    """
    n = 1 << s
    wl = s * l

    def _k(a: int, b: int) -> tuple:
        return (CompositeBlock("K", (a, b)),) if a > 1 and b > 1 else _ident((a * b).bit_length() - 1)

    p = CompositeBlock("P+" if sign == "+" else "P-", s)
    ops = (
        _rho(0, s) + _k(n, n**l),
        (CompositeBlock("D", s),) + _ident(wl),
        (p,) + _ident(wl),
        _k(n**l, n * n),
    )
    return Product(ops)


def decompose_L2b(grid: GridConfig) -> list[DecompositionTerm]:
    """2 alpha (alpha - 1) structured terms for the superdiagonal part of A^(e)."""
    s, alpha = grid.s, grid.alpha
    f2 = factor_F2(grid)
    terms = []
    for j in range(1, alpha):
        sel = block_selector(j - 1, j, grid.r)
        pad = _rho(0, s * (alpha - j - 1))
        for l in range(j):
            for k, (sign, w) in enumerate(zip("+-", f2.coefficients)):
                body = sel + pad + (l2b_bracket(s, l, sign),) + _ident(s * (j - l - 1))
                for t, tsign in enumerate(_TIME_SIGNS):
                    terms.append(DecompositionTerm(tsign * w, _time_factor(grid.m, t) + body,
                                                   "L2b", j=j, l=l, sub=k, time=t, label=f"P{sign}"))
    if len(terms) != 2 * alpha * (alpha - 1):
        raise AssertionError(f"L2b enumeration produced {len(terms)} terms")
    return terms


def decompose_full(grid: GridConfig) -> list[DecompositionTerm]:
    """All terms of L^(e) = L_1 - dt L_2 with -dt folded into the coefficients."""
    terms = decompose_L1(grid)
    terms += [t.scaled(-grid.dt) for t in decompose_L2a(grid)]
    terms += [t.scaled(-grid.dt) for t in decompose_L2b(grid)]
    terms.sort(key=lambda t: t.sort_key)
    return terms


def term_count(grid: GridConfig) -> int:
    """log n_t + 2 alpha (alpha+1) log n_x + alpha (5 alpha + 1) + 1."""
    a = grid.alpha
    return grid.m + 2 * a * (a + 1) * grid.s + a * (5 * a + 1) + 1


def class_counts(grid: GridConfig) -> dict[str, int]:
    a = grid.alpha
    return {"L1": grid.m + 1, "L2a": a * (a + 1) * (2 * grid.s + 3), "L2b": 2 * a * (a - 1)}


def reconstruct(terms: Sequence[DecompositionTerm], cap: int = DEFAULT_CAP) -> sp.csr_matrix:
    total = None
    for t in terms:
        part = t.coefficient * t.realize(cap)
        total = part if total is None else total + part
    return total.tocsr()


# --- Pauli oracle -----------------------------------------------------------

_PAULI_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


def pauli_string(x: int, z: int, n_qubits: int) -> str:
    """Letters for qubit 0 (most significant) first."""
    return "".join(_PAULI_LETTER[((x >> b) & 1, (z >> b) & 1)] for b in range(n_qubits - 1, -1, -1))


def pauli_matrix(label: str) -> np.ndarray:
    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
            "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
    return reduce(np.kron, (mats[c] for c in label), np.eye(1)).astype(complex)


def pauli_coefficient_table(M) -> np.ndarray:
    """c[x, z] = Tr(P_xz^dagger M) / 2^Q for every Pauli string."""
    dense = M.toarray() if sp.issparse(M) else np.asarray(M)
    n = dense.shape[0]
    if dense.shape != (n, n) or n & (n - 1) or n == 0:
        raise ValueError(f"matrix must be square with power-of-two dimension, got {dense.shape}")
    q = n.bit_length() - 1
    if q > PAULI_CAP_QUBITS:
        raise DimensionCapError(f"{q} qubits exceeds the Pauli oracle cap of {PAULI_CAP_QUBITS}")
    return kernels.pauli_coefficients(np.ascontiguousarray(dense, dtype=np.complex128))


def pauli_decompose(M, tol: float = 1e-12) -> list[tuple[complex, str]]:
    """Nonzero (|c| > tol) Pauli coefficients, ordered by (x, z)."""
    table = pauli_coefficient_table(M)
    q = table.shape[0].bit_length() - 1
    xs, zs = np.nonzero(np.abs(table) > tol)
    return [(complex(table[x, z]), pauli_string(int(x), int(z), q)) for x, z in zip(xs, zs)]


# --- JSON -------------------------------------------------------------------

def terms_to_json(grid: GridConfig, terms: Sequence[DecompositionTerm]) -> str:
    doc = {
        "schema": "carleman-lcu/terms/1",
        "config": {"nx": grid.n_x, "nt": grid.n_t, "alpha": grid.alpha,
                   "dx": grid.dx, "dt": grid.dt, "nu": grid.nu},
        "terms": [t.to_dict() for t in terms],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def terms_from_json(text: str) -> tuple[dict, list[DecompositionTerm]]:
    doc = json.loads(text)
    return doc["config"], [DecompositionTerm.from_dict(t) for t in doc["terms"]]
