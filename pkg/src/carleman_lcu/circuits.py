"""Gate-level circuit IR, the permutation circuits used by the F_2 factorization,
dense/sparse realization and a statevector simulator.

Conventions
-----------
* Qubit 0 is the most significant bit of the basis index (leftmost tensor
  factor); qubit q lives at bit position ``width - 1 - q``.
* Gates are listed in application order: the first gate acts on the state
  first, so the realized operator is ``G_k ... G_1``.
* Multi-controlled gates list their controls first and the target last.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels

MATRIX_WIDTH_CAP = 16

_SELF_INVERSE = {"X", "CX", "MCX", "SWAP", "Z", "CZ", "H"}
_ROTATIONS = {"RX", "RY", "RZ", "CRZ", "CRY"}
_KINDS = _SELF_INVERSE | _ROTATIONS


class CircuitError(ValueError):
    pass


def _rotation(kind: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind in ("RY", "CRY"):
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind in ("RZ", "CRZ"):
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])
    raise CircuitError(f"not a rotation: {kind}")


_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
}


@dataclass(frozen=True)
class Gate:
    """One gate. ``ctrl_state`` gives the required value of each control ('1' by default)."""

    kind: str
    qubits: tuple[int, ...]
    param: float | None = None
    ctrl_state: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        q = tuple(int(x) for x in self.qubits)
        object.__setattr__(self, "qubits", q)
        if len(set(q)) != len(q):
            raise CircuitError(f"repeated qubit in {self.kind}{q}")
        expected = {"X": 1, "Z": 1, "H": 1, "RX": 1, "RY": 1, "RZ": 1,
                    "CX": 2, "CZ": 2, "SWAP": 2, "CRZ": 2, "CRY": 2}.get(self.kind)
        if expected is not None and len(q) != expected:
            raise CircuitError(f"{self.kind} takes {expected} qubits, got {len(q)}")
        if self.kind == "MCX" and len(q) < 1:
            raise CircuitError("MCX needs a target")
        if (self.kind in _ROTATIONS) != (self.param is not None):
            raise CircuitError(f"{self.kind}: parameter {'required' if self.kind in _ROTATIONS else 'not allowed'}")
        if self.ctrl_state is not None:
            if len(self.ctrl_state) != self.num_controls or set(self.ctrl_state) - {"0", "1"}:
                raise CircuitError(f"bad ctrl_state {self.ctrl_state!r} for {self.num_controls} controls")

    @property
    def num_controls(self) -> int:
        if self.kind in ("CX", "CZ", "CRZ", "CRY", "MCX"):
            return len(self.qubits) - 1
        return 0

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[: self.num_controls]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    @property
    def negative_controls(self) -> int:
        return (self.ctrl_state or "").count("0")

    def inverse(self) -> "Gate":
        if self.kind in _ROTATIONS:
            return Gate(self.kind, self.qubits, -self.param, self.ctrl_state)
        return self

    def shifted(self, offset: int) -> "Gate":
        return Gate(self.kind, tuple(q + offset for q in self.qubits), self.param, self.ctrl_state)

    def unitary_2x2(self) -> np.ndarray:
        if self.kind in _ROTATIONS:
            return _rotation(self.kind, self.param)
        if self.kind in ("CX", "MCX"):
            return _FIXED["X"]
        if self.kind == "CZ":
            return _FIXED["Z"]
        return _FIXED[self.kind]

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubits": list(self.qubits)}
        if self.param is not None:
            d["param"] = float(self.param)
        if self.ctrl_state is not None:
            d["ctrl_state"] = self.ctrl_state
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        return cls(d["kind"], tuple(d["qubits"]), d.get("param"), d.get("ctrl_state"))


def mcx(controls: Sequence[int], target: int, ctrl_state: str | None = None) -> Gate:
    """C^qX; q = 0 gives X and q = 1 with positive control gives CX."""
    controls = tuple(controls)
    if ctrl_state is not None and "0" not in ctrl_state:
        ctrl_state = None
    if not controls:
        return Gate("X", (target,))
    if len(controls) == 1 and ctrl_state is None:
        return Gate("CX", (controls[0], target))
    return Gate("MCX", controls + (target,), ctrl_state=ctrl_state)


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.width < 0:
            raise CircuitError("negative width")
        for g in self.gates:
            if any(q < 0 or q >= self.width for q in g.qubits):
                raise CircuitError(f"gate {g.kind}{g.qubits} outside register of width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        """Run ``self`` then ``other``."""
        if other.width != self.width:
            raise CircuitError(f"width mismatch {self.width} vs {other.width}")
        return Circuit(self.width, self.gates + other.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.width, tuple(g.inverse() for g in reversed(self.gates)))

    def embed(self, width: int, offset: int) -> "Circuit":
        """Place this circuit on qubits offset..offset+self.width-1 of a wider register."""
        if offset < 0 or offset + self.width > width:
            raise CircuitError(f"cannot place width {self.width} at offset {offset} in {width}")
        return Circuit(width, tuple(g.shifted(offset) for g in self.gates))

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def to_dict(self) -> dict:
        return {"width": self.width, "gates": [g.to_dict() for g in self.gates]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        return cls(int(d["width"]), tuple(Gate.from_dict(g) for g in d["gates"]))


def concat(width: int, parts: Iterable[Circuit]) -> Circuit:
    gates: list[Gate] = []
    for p in parts:
        if p.width != width:
            raise CircuitError(f"width mismatch {p.width} vs {width}")
        gates.extend(p.gates)
    return Circuit(width, tuple(gates))


# --- permutation circuits for the F_2 factorization -------------------------
#
# The displayed constructions index the 2s-qubit register with qubit 0 as the
# least significant bit. They are mirrored here (published qubit p -> 2s-1-p) so
# that the realized matrices match the explicit n_x = 4 matrices under the
# package-wide most-significant-first convention.

def _mirror(s: int, p: int) -> int:
    return 2 * s - 1 - p


def _check_s(s: int) -> None:
    if s < 2:
        raise CircuitError(f"s must be >= 2, got {s}")


def p1_circuit(s: int) -> Circuit:
    """CX(s-q-1, 2s-q-1) for q = 0..s-1: |a, b> -> |a xor b, b> on two s-qubit halves."""
    _check_s(s)
    gates = [mcx([_mirror(s, s - q - 1)], _mirror(s, 2 * s - q - 1)) for q in range(s)]
    return Circuit(2 * s, tuple(gates))


def _p2_gates(s: int) -> list[Gate]:
    gates = [mcx([], _mirror(s, 0)), mcx([_mirror(s, 0)], _mirror(s, 1))]
    for q in range(s - 2):
        gates.append(mcx([_mirror(s, k) for k in range(q + 2)], _mirror(s, q + 2)))
    return gates


def p2_plus_circuit(s: int) -> Circuit:
    """X_0 CX(0,1) prod_q C^{q+2}X(0..q+1, q+2): cyclic shift on the low s qubits."""
    _check_s(s)
    return Circuit(2 * s, tuple(_p2_gates(s)))


def p2_minus_circuit(s: int) -> Circuit:
    """Same gates as P_2^+ in reverse order (its inverse, the opposite cyclic shift)."""
    _check_s(s)
    return Circuit(2 * s, tuple(reversed(_p2_gates(s))))


def p_plus_circuit(s: int) -> Circuit:
    """P^+ = P_2^+ P_1: P_2^+ runs first, then P_1."""
    return p2_plus_circuit(s) + p1_circuit(s)


def p_minus_circuit(s: int) -> Circuit:
    return p2_minus_circuit(s) + p1_circuit(s)


def commutation_circuit(a: int, b: int) -> Circuit:
    """prod_{r<n} prod_{q<m} S(r+m-q-1, r+m-q), realizing K^(a,b) for a = 2^m, b = 2^n."""
    m, n = _log2(a, "a"), _log2(b, "b")
    gates = [Gate("SWAP", (r + m - q - 1, r + m - q)) for r in range(n) for q in range(m)]
    return Circuit(m + n, tuple(gates))


def _log2(v: int, name: str) -> int:
    if not isinstance(v, (int, np.integer)) or v < 1 or v & (v - 1):
        raise CircuitError(f"{name} must be a power of two, got {v!r}")
    return int(v).bit_length() - 1


# --- realization and simulation ---------------------------------------------

def _bit(width: int, q: int) -> int:
    return width - 1 - q


def _control_mask(gate: Gate, width: int) -> tuple[int, int]:
    cmask = cval = 0
    state = gate.ctrl_state or "1" * gate.num_controls
    for q, v in zip(gate.controls, state):
        b = 1 << _bit(width, q)
        cmask |= b
        if v == "1":
            cval |= b
    return cmask, cval


def gate_matrix(gate: Gate, width: int) -> sp.csr_matrix:
    """Sparse 2^width realization of one gate."""
    N = 1 << width
    idx = np.arange(N, dtype=np.int64)
    if gate.kind == "SWAP":
        a, b = (1 << _bit(width, q) for q in gate.qubits)
        differ = ((idx & a) != 0) != ((idx & b) != 0)
        rows = np.where(differ, idx ^ (a | b), idx)
        return sp.csr_matrix((np.ones(N, dtype=complex), (rows, idx)), shape=(N, N))
    u = gate.unitary_2x2()
    t = 1 << _bit(width, gate.target)
    cmask, cval = _control_mask(gate, width)
    active = (idx & cmask) == cval
    tb = (idx & t) != 0
    base = idx & ~t
    cols = np.concatenate([idx[active], idx[active], idx[~active]])
    rows = np.concatenate([base[active], (base | t)[active], idx[~active]])
    vals = np.concatenate([u[0, tb[active].astype(int)], u[1, tb[active].astype(int)],
                           np.ones(int((~active).sum()), dtype=complex)])
    m = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    m.eliminate_zeros()
    return m


def circuit_to_matrix(circuit: Circuit, cap: int = MATRIX_WIDTH_CAP) -> sp.csr_matrix:
    if circuit.width > cap:
        raise CircuitError(f"width {circuit.width} exceeds matrix cap {cap}")
    out = sp.identity(1 << circuit.width, dtype=complex, format="csr")
    for g in circuit.gates:
        out = (gate_matrix(g, circuit.width) @ out).tocsr()
    return out


def apply_gate(gate: Gate, state: np.ndarray, width: int) -> None:
    """In-place application of one gate to a contiguous complex128 state."""
    if gate.kind == "SWAP":
        a, b = gate.qubits
        kernels.apply_swap(state, _bit(width, a), _bit(width, b))
        return
    cmask, cval = _control_mask(gate, width)
    tbit = _bit(width, gate.target)
    if gate.kind in ("X", "CX", "MCX"):
        kernels.apply_mcx(state, cmask, cval, tbit)
    else:
        kernels.apply_1q(state, tbit, np.ascontiguousarray(gate.unitary_2x2(), dtype=complex), cmask, cval)


def apply(circuit: Circuit, psi: np.ndarray) -> np.ndarray:
    """Simulate ``circuit`` on ``psi`` gate by gate; returns a new array.

    No normalization is required or enforced, so the map is linear on the
    whole space.
    """
    if psi.shape != (1 << circuit.width,):
        raise CircuitError(f"state of shape {psi.shape} does not match width {circuit.width}")
    state = np.array(psi, dtype=np.complex128, copy=True, order="C")
    for g in circuit.gates:
        apply_gate(g, state, circuit.width)
    return state


def basis_state(index: int | str, width: int) -> np.ndarray:
    """Computational basis state; a bitstring is read qubit 0 first."""
    if isinstance(index, str):
        index = int(index, 2)
    out = np.zeros(1 << width, dtype=complex)
    out[index] = 1.0
    return out
