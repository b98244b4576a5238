"""Pure numpy implementations of the kernels in ``_kernels.pyx``.

Same signatures and in-place semantics as the compiled module; used when the
extension is not built or ``CARLEMAN_LCU_PURE_PYTHON`` is set.
"""
from __future__ import annotations

import numpy as np


def _indices(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def apply_mcx(state: np.ndarray, cmask: int, cval: int, tbit: int) -> None:
    idx = _indices(state.shape[0])
    t = 1 << tbit
    sel = idx[((idx & t) == 0) & ((idx & cmask) == cval)]
    lo = state[sel].copy()
    state[sel] = state[sel | t]
    state[sel | t] = lo


def apply_swap(state: np.ndarray, abit: int, bbit: int) -> None:
    idx = _indices(state.shape[0])
    a, b = 1 << abit, 1 << bbit
    sel = idx[((idx & a) != 0) & ((idx & b) == 0)]
    partner = (sel ^ a) | b
    tmp = state[sel].copy()
    state[sel] = state[partner]
    state[partner] = tmp


def apply_1q(state: np.ndarray, tbit: int, u: np.ndarray, cmask: int = 0, cval: int = 0) -> None:
    idx = _indices(state.shape[0])
    t = 1 << tbit
    sel = idx[((idx & t) == 0) & ((idx & cmask) == cval)]
    a0 = state[sel].copy()
    a1 = state[sel | t].copy()
    state[sel] = u[0, 0] * a0 + u[0, 1] * a1
    state[sel | t] = u[1, 0] * a0 + u[1, 1] * a1


def _parity_signs(n: int) -> np.ndarray:
    idx = _indices(n)
    anded = np.bitwise_and.outer(idx, idx)
    parity = np.zeros_like(anded)
    while anded.any():
        parity ^= anded & 1
        anded >>= 1
    return 1.0 - 2.0 * parity


def pauli_coefficients(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    idx = _indices(n)
    signs = _parity_signs(n)  # signs[z, j] = (-1)^{|z & j|}
    out = np.empty((n, n), dtype=np.complex128)
    ipow = np.array([1.0, -1j, -1.0, 1j])
    xz_weight = _parity_weight(n)
    for x in range(n):
        v = m[idx ^ x, idx]
        out[x] = ipow[xz_weight[x] & 3] * (signs @ v) / n
    return out


def _parity_weight(n: int) -> np.ndarray:
    """popcount(x & z) for all (x, z)."""
    idx = _indices(n)
    anded = np.bitwise_and.outer(idx, idx)
    count = np.zeros_like(anded)
    while anded.any():
        count += anded & 1
        anded >>= 1
    return count
