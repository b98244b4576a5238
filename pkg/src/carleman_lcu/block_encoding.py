"""Unitary completion, block encoding U = U_1 U_2 and gate-cost estimates.

For a term L (a 0/1 partial permutation) with completion L_bar and Gram
projector G = L L^T:

* U_2 = I (x) L_bar, synthesized from X gates (for rho_1/rho_2 factors) and
  the permutation circuits of P and K blocks;
* U_1 = I (x) (I - G) + X (x) G, a single multi-controlled X on the ancilla
  with a control wherever G has a rho_0 (control on 0) or rho_3 (control on 1)
  factor.

The ancilla is qubit 0, so L is the top-right block of U_1 U_2.
Completion and Gram are derived structurally from the factor lists; no
matrix is formed unless verification is requested.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .basis import DEFAULT_CAP, RHO, Basis, realize, rho_bar, total_width
from .burgers import GridConfig
from .circuits import Circuit, Gate, circuit_to_matrix, mcx
from .decomposition import CompositeBlock, DecompositionTerm, Product, decompose_full

VERIFY_WIDTH_CAP = 12

_ONE = np.array([1, 1])
_VEC_TO_RHO = {(1, 0): RHO[0], (0, 1): RHO[3], (1, 1): RHO[4]}


class EncodingError(ValueError):
    pass


# --- completion -------------------------------------------------------------

def _complete_factor(f):
    if isinstance(f, Basis):
        if not f.in_p:
            raise EncodingError(f"term factor {f!r} is not in the mixed set")
        return rho_bar(f)
    if isinstance(f, CompositeBlock):
        return CompositeBlock("I", f.width) if f.kind == "D" else f
    if isinstance(f, Product):
        return Product(tuple(complete_factors(op) for op in f.operands))
    raise EncodingError(f"cannot complete factor {f!r}")


def complete_factors(factors: Sequence) -> tuple:
    return tuple(_complete_factor(f) for f in factors)


def completion(term: DecompositionTerm | Sequence) -> tuple:
    """Unitary completion L_bar as a factor list.

    Mixed-set factors map through rho_bar, D blocks become identities and
    permutation blocks (P, K) are kept.
    """
    factors = term.factors if isinstance(term, DecompositionTerm) else term
    return complete_factors(factors)


def complement(term: DecompositionTerm | Sequence, cap: int = DEFAULT_CAP) -> sp.csr_matrix:
    """L^c = L_bar - L."""
    factors = term.factors if isinstance(term, DecompositionTerm) else term
    return (realize(completion(factors), cap) - realize(factors, cap)).tocsr()


# --- Gram projector ---------------------------------------------------------
#
# G = L L^T is diagonal with 0/1 entries for every term. It is tracked as one
# indicator 2-vector per qubit; applying a partial permutation A maps the
# diagonal g of G to A g (since A diag(g) A^T = diag(A g)).

def _apply_factor_list(factors: Sequence, vecs: list) -> list:
    out, pos = [], 0
    for f in factors:
        w = f.width
        out.extend(_apply_factor(f, vecs[pos: pos + w]))
        pos += w
    return out


def _factorize(vec: np.ndarray, width: int) -> list:
    """Split a 0/1 vector on ``width`` qubits into per-qubit indicators."""
    t = vec.reshape((2,) * width)
    per = []
    for k in range(width):
        axes = tuple(i for i in range(width) if i != k)
        per.append((np.abs(t).sum(axis=axes) > 0).astype(int))
    rebuilt = per[0]
    for p in per[1:]:
        rebuilt = np.kron(rebuilt, p)
    if width and not np.array_equal(rebuilt, (np.abs(vec) > 0).astype(int)):
        raise EncodingError("Gram projector is not a tensor product of single-qubit projectors")
    return per


def _apply_factor(f, vecs: list) -> list:
    if isinstance(f, Basis):
        return [np.abs(f.dense()).astype(int) @ vecs[0]]
    if isinstance(f, Product):
        for op in reversed(f.operands):
            vecs = _apply_factor_list(op, vecs)
        return vecs
    if f.kind == "I":
        return list(vecs)
    if f.kind == "D":
        s = f.size
        return [v * np.array([1, 0]) for v in vecs[:s]] + list(vecs[s:])
    if f.kind == "K":
        a, _ = f.size
        wa = a.bit_length() - 1
        return list(vecs[wa:]) + list(vecs[:wa])
    # P family: a permutation maps the all-ones vector to itself
    if all(np.array_equal(v, _ONE) for v in vecs):
        return list(vecs)
    full = vecs[0]
    for v in vecs[1:]:
        full = np.kron(full, v)
    moved = np.abs(f.matrix()).astype(int) @ full
    return _factorize(np.asarray(moved).ravel(), f.width)


def gram_labels(factors: Sequence) -> tuple:
    """Per-qubit labels of L L^T, each one of rho_0, rho_3, rho_4."""
    vecs = [_ONE.copy() for _ in range(total_width(factors))]
    vecs = _apply_factor_list(factors, vecs)
    labels = []
    for v in vecs:
        key = tuple(int(x > 0) for x in v)
        if key == (0, 0):
            raise EncodingError("term realizes to the zero matrix")
        labels.append(_VEC_TO_RHO[key])
    return tuple(labels)


def gram(term: DecompositionTerm | Sequence) -> tuple:
    factors = term.factors if isinstance(term, DecompositionTerm) else term
    return gram_labels(factors)


# --- circuits ---------------------------------------------------------------

def _factor_circuit(f, width: int, offset: int) -> list[Gate]:
    """Gates realizing a completed factor placed at ``offset``."""
    if isinstance(f, Basis):
        if f is Basis.SIGMA0:
            return [Gate("X", (offset,))]
        if f is Basis.SIGMA3:
            return []
        raise EncodingError(f"unexpected completed factor {f!r}")
    if isinstance(f, Product):
        gates: list[Gate] = []
        for op in reversed(f.operands):  # rightmost operand acts first
            gates += _list_circuit(op, width, offset)
        return gates
    if f.kind == "I":
        return []
    return list(f.circuit().embed(width, offset).gates)


def _list_circuit(factors: Sequence, width: int, offset: int) -> list[Gate]:
    gates, pos = [], offset
    for f in factors:
        gates += _factor_circuit(f, width, pos)
        pos += f.width
    return gates


def completion_circuit(factors: Sequence, width: int | None = None, offset: int = 0) -> Circuit:
    total = total_width(factors)
    width = total + offset if width is None else width
    return Circuit(width, tuple(_list_circuit(factors, width, offset)))


@dataclass(frozen=True)
class U1Descriptor:
    """Single C^qX on the ancilla; ``controls`` index the full register."""

    controls: tuple
    ctrl_state: str
    target: int = 0

    @property
    def q(self) -> int:
        return len(self.controls)

    def gate(self) -> Gate:
        return mcx(self.controls, self.target, self.ctrl_state)

    def to_dict(self) -> dict:
        return {"controls": list(self.controls), "ctrl_state": self.ctrl_state, "target": self.target, "q": self.q}


@dataclass(frozen=True)
class BlockEncoding:
    u1: U1Descriptor
    u2: Circuit
    width: int
    completion_x: int  # X gates contributed by rho_bar on mixed-set factors

    def u1_circuit(self) -> Circuit:
        return Circuit(self.width, (self.u1.gate(),))

    def circuit(self) -> Circuit:
        """U = U_1 U_2 in application order (U_2 first)."""
        return self.u2 + self.u1_circuit()

    def to_dict(self) -> dict:
        return {"width": self.width, "u1": self.u1.to_dict(), "u2": self.u2.to_dict()}


def block_encode(term: DecompositionTerm | Sequence) -> BlockEncoding:
    factors = term.factors if isinstance(term, DecompositionTerm) else tuple(term)
    n = total_width(factors)
    width = n + 1
    labels = gram_labels(factors)
    controls, state = [], []
    for k, lab in enumerate(labels):
        if lab is RHO[0]:
            controls.append(k + 1)
            state.append("0")
        elif lab is RHO[3]:
            controls.append(k + 1)
            state.append("1")
    u1 = U1Descriptor(tuple(controls), "".join(state))
    comp = completion(factors)
    u2 = completion_circuit(comp, width, offset=1)
    comp_x = sum(1 for f in comp if f is Basis.SIGMA0)
    return BlockEncoding(u1, u2, width, comp_x)


# --- verification -----------------------------------------------------------

@dataclass
class VerificationReport:
    ok: bool
    checks: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    mismatch: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _max_abs(m) -> float:
    m = m.toarray() if sp.issparse(m) else np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def verify_encoding(enc: BlockEncoding, term: DecompositionTerm | Sequence, tol: float = 1e-12) -> VerificationReport:
    """Dense check of the encoding and the completion identities."""
    factors = term.factors if isinstance(term, DecompositionTerm) else tuple(term)
    if enc.width > VERIFY_WIDTH_CAP:
        raise EncodingError(f"width {enc.width} exceeds the verification cap {VERIFY_WIDTH_CAP}")
    n = 1 << (enc.width - 1)
    L = realize(factors).toarray()
    Lbar = realize(completion(factors)).toarray()
    Lc = Lbar - L
    G = L @ L.T
    G_struct = realize(gram_labels(factors)).toarray()
    U1 = circuit_to_matrix(enc.u1_circuit()).toarray()
    U2 = circuit_to_matrix(enc.u2).toarray()
    U = U1 @ U2
    U_circ = circuit_to_matrix(enc.circuit()).toarray()
    eye_n, eye_2n = np.eye(n), np.eye(2 * n)
    errors = {
        "u1_unitary": _max_abs(U1 @ U1.conj().T - eye_2n),
        "u2_unitary": _max_abs(U2 @ U2.conj().T - eye_2n),
        "u_unitary": _max_abs(U @ U.conj().T - eye_2n),
        "u_equals_u1u2": _max_abs(U_circ - U),
        "top_right_block": _max_abs(U[:n, n:] - L),
        "u2_block_diag": _max_abs(U2 - np.kron(np.eye(2), Lbar)),
        "gram_structure": _max_abs(G - G_struct),
        "gram_idempotent": _max_abs(G @ G - G),
        "completion_unitary": _max_abs(Lbar @ Lbar.T - eye_n),
        "completion_left": _max_abs(Lbar @ L.T - G),
        "completion_right": _max_abs(L @ Lbar.T - G),
        "complement_orthogonal": _max_abs(Lc @ L.T),
        "complement_gram": _max_abs(Lc @ Lc.T - (eye_n - G)),
    }
    checks = {k: v <= tol for k, v in errors.items()}
    ok = all(checks.values())
    mismatch = ""
    if not checks["top_right_block"]:
        diff = np.abs(U[:n, n:] - L)
        r, c = np.unravel_index(np.argmax(diff), diff.shape)
        mismatch = f"top-right block differs at (row {r}, col {c}): got {U[r, n + c]:.3g}, expected {L[r, c]:.3g}"
    elif not ok:
        mismatch = "failed: " + ", ".join(k for k, v in checks.items() if not v)
    return VerificationReport(ok, checks, errors, mismatch)


# --- resource estimation ----------------------------------------------------

@dataclass(frozen=True)
class CostModel:
    """Clifford/T cost rules.

    C^qX for q >= 3 costs ``mcx_clifford * q`` Clifford and ``mcx_t * q`` T
    gates (linear in q with one dirty ancilla; the defaults correspond to
    about four Toffolis per control). Negative controls add two X gates each.
    """

    x: int = 1
    cx: int = 1
    swap: int = 3
    toffoli_clifford: int = 8
    toffoli_t: int = 7
    mcx_clifford: int = 32
    mcx_t: int = 28
    negative_control: int = 2

    def gate_cost(self, g: Gate) -> tuple[int, int]:
        if g.kind in ("X", "Z", "H"):
            return self.x, 0
        if g.kind in ("CX", "CZ"):
            return self.cx, 0
        if g.kind == "SWAP":
            return self.swap, 0
        if g.kind == "MCX":
            q = g.num_controls
            extra = self.negative_control * g.negative_controls
            if q == 1:
                return self.cx + extra, 0
            if q == 2:
                return self.toffoli_clifford + extra, self.toffoli_t
            return self.mcx_clifford * q + extra, self.mcx_t * q
        raise EncodingError(f"no cost rule for {g.kind}")

    def circuit_cost(self, c: Circuit) -> tuple[int, int]:
        cl = t = 0
        for g in c.gates:
            a, b = self.gate_cost(g)
            cl += a
            t += b
        return cl, t


@dataclass(frozen=True)
class ResourceCount:
    clifford: int
    t: int
    cqx_largest: int
    term_class: str
    q: int = 0
    qubits: int = 0


def resource_estimate(term: DecompositionTerm, model: CostModel | None = None,
                      enc: BlockEncoding | None = None) -> ResourceCount:
    model = model or CostModel()
    enc = enc or block_encode(term)
    cl, t = model.circuit_cost(enc.circuit())
    largest = max([g.num_controls for g in enc.circuit().gates if g.kind in ("X", "CX", "MCX")] + [0])
    return ResourceCount(cl, t, largest, term.term_class, enc.u1.q, enc.width)


def resource_rows(grid: GridConfig, model: CostModel | None = None,
                  terms: Sequence[DecompositionTerm] | None = None) -> list[dict]:
    terms = decompose_full(grid) if terms is None else terms
    rows = []
    for k, term in enumerate(terms):
        rc = resource_estimate(term, model)
        rows.append({"term_id": k, "class": term.term_class, "j": term.j, "l": term.l,
                     "q": rc.q, "clifford": rc.clifford, "t": rc.t})
    return rows


def aggregate(rows: Sequence[dict], grid: GridConfig) -> dict:
    out = {"qubits": grid.m + grid.r + grid.alpha * grid.s + 1, "classes": {}}
    for cls in ("L1", "L2a", "L2b"):
        sel = [r for r in rows if r["class"] == cls]
        if not sel:
            out["classes"][cls] = {"terms": 0}
            continue
        out["classes"][cls] = {
            "terms": len(sel),
            "clifford_min": min(r["clifford"] for r in sel),
            "clifford_max": max(r["clifford"] for r in sel),
            "t_min": min(r["t"] for r in sel),
            "t_max": max(r["t"] for r in sel),
        }
    out["total_terms"] = len(rows)
    return out


def resource_table(grid: GridConfig, model: CostModel | None = None) -> tuple[str, dict]:
    """Per-term CSV text and the aggregate table."""
    rows = resource_rows(grid, model)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["term_id", "class", "j", "l", "q", "clifford", "t"],
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue(), aggregate(rows, grid)


def cost_model_dict(model: CostModel) -> dict:
    return asdict(model)


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)


# --- scaling sweeps ---------------------------------------------------------

def _fit_through_origin(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares c for y ~ c x and the relative residual ||y - c x|| / ||y||."""
    c = float(x @ y / (x @ x))
    return c, float(np.linalg.norm(y - c * x) / np.linalg.norm(y))


def scaling_sweep(n_x_values: Sequence[int], alpha: int = 2, n_t: int | None = None,
                  dt: float = 0.25, model: CostModel | None = None) -> dict:
    """Worst L2b-term Clifford/T counts against log2(n_x).

    ``n_t`` defaults to n_x at each point. Clifford counts are fitted to
    c * alpha * s^2 and T counts to c' * s^2 (s = log2 n_x); the log-log
    slope against s is reported alongside.
    """
    s_vals, cl, tc, qubits = [], [], [], []
    for nx in n_x_values:
        grid = GridConfig(int(nx), int(n_t or nx), dt, alpha=alpha)
        rows = [r for r in resource_rows(grid, model) if r["class"] == "L2b"]
        if not rows:
            raise EncodingError("scaling sweep needs alpha >= 2 (no L2b terms)")
        s_vals.append(grid.s)
        cl.append(max(r["clifford"] for r in rows))
        tc.append(max(r["t"] for r in rows))
        qubits.append(grid.m + grid.r + grid.alpha * grid.s + 1)
    s = np.array(s_vals, dtype=float)
    c_cl, res_cl = _fit_through_origin(alpha * s**2, np.array(cl, dtype=float))
    c_t, res_t = _fit_through_origin(s**2, np.array(tc, dtype=float))
    slope = lambda y: float(np.polyfit(np.log(s), np.log(np.asarray(y, dtype=float)), 1)[0]) if len(s) > 1 else float("nan")
    return {
        "alpha": alpha, "n_x": [int(v) for v in n_x_values], "s": s_vals, "qubits": qubits,
        "worst_l2b_clifford": cl, "worst_l2b_t": tc,
        "clifford_fit": {"c": c_cl, "model": "c*alpha*s^2", "relative_residual": res_cl, "loglog_slope": slope(cl)},
        "t_fit": {"c": c_t, "model": "c*s^2", "relative_residual": res_t, "loglog_slope": slope(tc)},
    }
