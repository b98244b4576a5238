import numpy as np
import pytest

from carleman_lcu import kernels
from carleman_lcu.decomposition import pauli_matrix, pauli_string

BACKENDS = kernels.backends()


def _random_state(rng, n_qubits):
    v = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return v / np.linalg.norm(v)


def _dense_mcx(n_qubits, cmask, cval, tbit):
    dim = 2**n_qubits
    perm = np.arange(dim)
    for k in range(dim):
        if k & cmask == cval:
            perm[k] = k ^ (1 << tbit)
    return perm


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_mcx_is_controlled_permutation(name, rng):
    mod = BACKENDS[name]
    psi = _random_state(rng, 5)
    cmask, cval, tbit = 0b10110, 0b00100, 0
    out = psi.copy()
    mod.apply_mcx(out, cmask, cval, tbit)
    perm = _dense_mcx(5, cmask, cval, tbit)
    want = np.empty_like(psi)
    want[perm] = psi
    assert np.array_equal(out, want)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_swap(name, rng):
    psi = _random_state(rng, 4)
    out = psi.copy()
    BACKENDS[name].apply_swap(out, 0, 3)
    for k in range(16):
        b0, b3 = k & 1, (k >> 3) & 1
        kk = (k & ~0b1001) | (b0 << 3) | b3
        assert out[kk] == psi[k]


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_single_qubit_gate(name, rng):
    psi = _random_state(rng, 3)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    out = psi.copy()
    BACKENDS[name].apply_1q(out, 1, h)
    # bit 1 is the middle qubit of three
    want = np.kron(np.kron(np.eye(2), h), np.eye(2)) @ psi
    assert np.allclose(out, want, atol=1e-14)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_pauli_coefficients_against_trace(name, rng):
    n = 3
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    table = BACKENDS[name].pauli_coefficients(np.ascontiguousarray(m))
    for x in range(8):
        for z in range(8):
            p = pauli_matrix(pauli_string(x, z, n))
            assert abs(table[x, z] - np.trace(p.conj().T @ m) / 8) < 1e-12


@pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled extension not built")
def test_backends_agree(rng):
    py, cy = BACKENDS["python"], BACKENDS["compiled"]
    m = np.ascontiguousarray(rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)))
    assert np.max(np.abs(py.pauli_coefficients(m) - cy.pauli_coefficients(m))) < 1e-13
    psi = _random_state(rng, 6)
    a, b = psi.copy(), psi.copy()
    py.apply_mcx(a, 0b110000, 0b010000, 2)
    cy.apply_mcx(b, 0b110000, 0b010000, 2)
    assert np.array_equal(a, b)
    u = np.array([[0.6, 0.8j], [0.8j, 0.6]])
    py.apply_1q(a, 4, u, 0b1, 0b1)
    cy.apply_1q(b, 4, u, 0b1, 0b1)
    assert np.allclose(a, b, atol=1e-15)


def test_selected_backend_is_known():
    assert kernels.BACKEND in BACKENDS


def test_environment_forces_python_backend():
    import os
    import subprocess
    import sys

    env = dict(os.environ, CARLEMAN_LCU_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import carleman_lcu; print(carleman_lcu.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
