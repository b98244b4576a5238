"""Statevector VQLS with the local cost function.

Cost: C(theta) = 1/2 (1 - 1/n sum_k <Z_k>_w), where psi = V(theta)|0>,
phi = sum_l c_l L_l psi and w = U_b^dagger phi / ||phi||. U_b is a
Householder reflection taking |0...0> to b (up to a global phase).
Evaluation is exact and noiseless.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.optimize as so
import scipy.sparse as sp

from .circuits import Circuit, Gate, apply
from .decomposition import DecompositionTerm

DEFAULT_SEED = 1234


# --- right-hand side --------------------------------------------------------

def prepare_b(B_e: np.ndarray) -> np.ndarray:
    """Normalized right-hand side as a statevector."""
    b = np.asarray(B_e, dtype=complex)
    norm = np.linalg.norm(b)
    if norm == 0:
        raise ValueError("right-hand side is the zero vector")
    return b / norm


class Householder:
    """Reflection U with U e_0 = e^{i phi} b; self-inverse up to that phase."""

    def __init__(self, b: np.ndarray):
        b = np.asarray(b, dtype=complex)
        self.dim = len(b)
        self.phase = b[0] / abs(b[0]) if abs(b[0]) > 0 else 1.0
        b = b / self.phase
        v = -b.copy()
        v[0] += 1.0
        nv = np.linalg.norm(v)
        self.v = v / nv if nv > 1e-15 else None

    def adjoint_apply(self, x: np.ndarray) -> np.ndarray:
        """U_b^dagger x, dropping the global phase."""
        if self.v is None:
            return x.copy()
        return x - 2 * self.v * np.vdot(self.v, x)

    apply = adjoint_apply  # the reflection is Hermitian

    def matrix(self) -> np.ndarray:
        if self.v is None:
            return np.eye(self.dim, dtype=complex)
        return np.eye(self.dim) - 2 * np.outer(self.v, self.v.conj())


class DenseCompletion:
    """Any explicit unitary whose first column is b (used to compare completions)."""

    def __init__(self, U: np.ndarray):
        self.U = np.asarray(U, dtype=complex)

    def adjoint_apply(self, x: np.ndarray) -> np.ndarray:
        return self.U.conj().T @ x

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.U @ x


# --- ansatz -----------------------------------------------------------------

def _ry_cz_ring(n: int, theta: np.ndarray) -> list[Gate]:
    gates = [Gate("RY", (q,), float(theta[q])) for q in range(n)]
    if n > 1:
        pairs = [(q, (q + 1) % n) for q in range(n)] if n > 2 else [(0, 1)]
        gates += [Gate("CZ", p) for p in pairs]
    return gates


def _circuit18(n: int, theta: np.ndarray) -> list[Gate]:
    gates = [Gate("RX", (q,), float(theta[q])) for q in range(n)]
    gates += [Gate("RZ", (q,), float(theta[n + q])) for q in range(n)]
    for q in range(n):
        c, t = n - q - 1, (n - q) % n
        gates.append(Gate("CRZ", (c, t), float(theta[2 * n + q])))
    return gates


# name -> (parameters per qubit per layer, layer builder)
ANSATZ_TABLE: dict[str, tuple[int, Callable]] = {
    "ry_cz_ring": (1, _ry_cz_ring),
    "circuit18": (3, _circuit18),
}


@dataclass
class AnsatzConfig:
    qubits: int
    layers: int = 3
    kind: str = "ry_cz_ring"
    seed: int = DEFAULT_SEED
    params: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ANSATZ_TABLE:
            raise ValueError(f"unknown ansatz {self.kind!r}; choose from {sorted(ANSATZ_TABLE)}")
        if self.qubits < 1 or self.layers < 1:
            raise ValueError("qubits and layers must be positive")
        if self.params is not None:
            self.params = np.asarray(self.params, dtype=float)
            if self.params.shape != (self.num_params,):
                raise ValueError(f"expected {self.num_params} parameters, got {self.params.shape}")

    @property
    def per_layer(self) -> int:
        return ANSATZ_TABLE[self.kind][0] * self.qubits

    @property
    def num_params(self) -> int:
        return self.layers * self.per_layer

    def initial_params(self) -> np.ndarray:
        if self.params is not None:
            return self.params.copy()
        return np.random.default_rng(self.seed).uniform(0.0, 2 * np.pi, self.num_params)


def ansatz_circuit(cfg: AnsatzConfig, theta: np.ndarray) -> Circuit:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (cfg.num_params,):
        raise ValueError(f"expected {cfg.num_params} parameters, got {theta.shape}")
    build = ANSATZ_TABLE[cfg.kind][1]
    gates: list[Gate] = []
    for k in range(cfg.layers):
        gates += build(cfg.qubits, theta[k * cfg.per_layer:(k + 1) * cfg.per_layer])
    return Circuit(cfg.qubits, tuple(gates))


def ansatz_state(cfg: AnsatzConfig, theta: np.ndarray | None = None) -> np.ndarray:
    theta = cfg.initial_params() if theta is None else theta
    zero = np.zeros(1 << cfg.qubits, dtype=complex)
    zero[0] = 1.0
    return apply(ansatz_circuit(cfg, theta), zero)


# --- cost -------------------------------------------------------------------

def _z_signs(n: int) -> np.ndarray:
    """signs[k, x] = (-1)^{bit of qubit k in x}, qubit 0 most significant."""
    idx = np.arange(1 << n)
    return np.array([1 - 2 * ((idx >> (n - 1 - k)) & 1) for k in range(n)], dtype=float)


class TermOperator:
    """Realized term list; ``matvec`` applies sum_l c_l L_l."""

    def __init__(self, terms: Sequence[DecompositionTerm]):
        self.coefficients = np.array([t.coefficient for t in terms])
        self.mats = [t.realize() for t in terms]
        total = None
        for c, m in zip(self.coefficients, self.mats):
            total = c * m if total is None else total + c * m
        self.total = sp.csr_matrix(total)
        self.dim = self.total.shape[0]

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        return self.total @ psi

    def term_vectors(self, psi: np.ndarray) -> np.ndarray:
        return np.stack([m @ psi for m in self.mats])


def _as_operator(op) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(op, TermOperator):
        return op.matvec
    if sp.issparse(op) or isinstance(op, np.ndarray):
        return lambda psi: op @ psi
    return TermOperator(op).matvec


def local_cost_state(psi: np.ndarray, op, b_state: np.ndarray, completion=None) -> float:
    """Local cost for an explicit trial state."""
    n = len(psi).bit_length() - 1
    ub = completion or Householder(b_state)
    phi = _as_operator(op)(psi)
    norm2 = np.vdot(phi, phi).real
    if norm2 == 0:
        return 0.5
    w = ub.adjoint_apply(phi)
    probs = np.abs(w) ** 2 / norm2
    z = _z_signs(n) @ probs
    return float(0.5 * (1.0 - z.mean()))


def local_cost(theta, op, b_state: np.ndarray, cfg: AnsatzConfig, completion=None) -> float:
    return local_cost_state(ansatz_state(cfg, theta), op, b_state, completion)


def local_cost_terms(psi: np.ndarray, op: TermOperator, b_state: np.ndarray, completion=None) -> float:
    """Same cost assembled from the beta_{ll'} and delta^k_{ll'} tables."""
    n = len(psi).bit_length() - 1
    ub = completion or Householder(b_state)
    c = op.coefficients
    V = op.term_vectors(psi)  # V[l] = L_l psi
    beta = V.conj() @ V.T  # beta[l', l] = <L_l' psi, L_l psi>
    W = np.stack([ub.adjoint_apply(v) for v in V])
    signs = _z_signs(n)
    delta = np.einsum("kx,ax,bx->kab", signs, W.conj(), W)  # delta[k, l', l]
    weight = np.outer(c.conj(), c)
    den = np.sum(weight * beta).real
    num = np.einsum("kab,ab->k", delta, weight).real
    return float(0.5 * (1.0 - num.mean() / den))


def central_gradient(f: Callable, theta: np.ndarray, h: float = 1e-4) -> np.ndarray:
    g = np.empty_like(theta)
    for k in range(len(theta)):
        e = np.zeros_like(theta)
        e[k] = h
        g[k] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


# --- optimization -----------------------------------------------------------

@dataclass
class VqlsResult:
    theta_opt: np.ndarray
    cost: float
    cost_trace: list = field(default_factory=list)
    state: np.ndarray | None = None
    fidelity: float | None = None
    iterations: int = 0
    converged: bool = False
    message: str = ""
    seed: int = DEFAULT_SEED


def optimize(op, b_state: np.ndarray, cfg: AnsatzConfig, tol: float = 1e-3, max_iter: int = 2000,
             h: float = 1e-4, reference: np.ndarray | None = None) -> VqlsResult:
    """Polak-Ribiere nonlinear CG with central-difference gradients.

    A run that hits ``max_iter`` is returned with ``converged=False``.
    """
    if not isinstance(op, TermOperator) and not (sp.issparse(op) or isinstance(op, np.ndarray)):
        op = TermOperator(op)
    ub = Householder(b_state)

    def f(theta):
        return local_cost(theta, op, b_state, cfg, ub)

    theta0 = cfg.initial_params()
    trace = [(0, f(theta0))]

    def callback(xk):
        trace.append((len(trace), f(xk)))

    res = so.minimize(f, theta0, jac=lambda t: central_gradient(f, t, h), method="CG",
                      tol=tol, callback=callback, options={"maxiter": max_iter, "gtol": tol})
    state = ansatz_state(cfg, res.x)
    fid = fidelity(state, reference) if reference is not None else None
    return VqlsResult(theta_opt=res.x, cost=float(res.fun), cost_trace=trace, state=state, fidelity=fid,
                      iterations=int(res.nit), converged=bool(res.success), message=str(res.message),
                      seed=cfg.seed)


# --- comparison -------------------------------------------------------------

def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cannot compute fidelity with a zero vector")
    return float(abs(np.vdot(a / na, b / nb)) ** 2)


def rescale_to_rhs(state: np.ndarray, B_e: np.ndarray, block: int) -> np.ndarray:
    """Scale a normalized solution so its first time block best matches B_e there.

    The first block row of the system is the identity, so the exact
    solution equals B_e on that block; a least-squares complex scale also
    removes the global phase.
    """
    s0, b0 = state[:block], B_e[:block]
    den = np.vdot(s0, s0)
    if abs(den) == 0:
        raise ValueError("state has no weight on the first time block")
    return state * (np.vdot(s0, b0) / den)


@dataclass
class ComparisonReport:
    fidelity: float
    u_classical: np.ndarray
    u_vqls: np.ndarray
    rel_l2_per_step: np.ndarray
    max_abs_deviation: float

    @property
    def max_rel_l2(self) -> float:
        return float(self.rel_l2_per_step.max())


def compare_solutions(vqls_state: np.ndarray, Y_classical: np.ndarray, grid) -> ComparisonReport:
    """Global fidelity and per-time-step u-trajectory agreement."""
    from .embedding import extract_solution

    if vqls_state.shape != Y_classical.shape:
        raise ValueError(f"shape mismatch {vqls_state.shape} vs {Y_classical.shape}")
    block = grid.alpha * grid.block_dim
    fid = fidelity(vqls_state, Y_classical)
    scaled = rescale_to_rhs(vqls_state, Y_classical, block)
    uc = extract_solution(Y_classical, grid).u
    uq = extract_solution(scaled, grid).u
    uq = uq.real if np.allclose(uq.imag, 0, atol=1e-10 * max(1.0, np.abs(uq).max())) else uq
    uc = uc.real if np.iscomplexobj(uc) and np.allclose(uc.imag, 0) else uc
    diff = np.linalg.norm(uq - uc, axis=1)
    ref = np.linalg.norm(uc, axis=1)
    rel = diff / np.where(ref > 0, ref, 1.0)
    return ComparisonReport(fid, uc, uq, rel, float(np.abs(uq - uc).max()))
