# cython: language_level=3
"""Compiled statevector and Pauli-scan kernels.

All state kernels work in place on contiguous complex128 arrays. Qubits are
addressed by bit position in the basis index (bit 0 = least significant);
the mapping from circuit qubit labels to bit positions lives in
``carleman_lcu.circuits``.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def apply_mcx(double complex[::1] state, long long cmask, long long cval, long long tbit):
    cdef Py_ssize_t n = state.shape[0]
    cdef long long t = 1LL << tbit
    cdef long long i
    cdef double complex tmp
    with nogil:
        for i in range(n):
            if (i & t) == 0 and (i & cmask) == cval:
                tmp = state[i]
                state[i] = state[i | t]
                state[i | t] = tmp


def apply_swap(double complex[::1] state, long long abit, long long bbit):
    cdef Py_ssize_t n = state.shape[0]
    cdef long long a = 1LL << abit
    cdef long long b = 1LL << bbit
    cdef long long i, j
    cdef double complex tmp
    with nogil:
        for i in range(n):
            # visit each (a=1, b=0) index once and exchange with its (a=0, b=1) partner
            if (i & a) != 0 and (i & b) == 0:
                j = (i ^ a) | b
                tmp = state[i]
                state[i] = state[j]
                state[j] = tmp


def apply_1q(double complex[::1] state, long long tbit, double complex[:, ::1] u,
             long long cmask=0, long long cval=0):
    cdef Py_ssize_t n = state.shape[0]
    cdef long long t = 1LL << tbit
    cdef long long i
    cdef double complex a0, a1
    cdef double complex u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    with nogil:
        for i in range(n):
            if (i & t) == 0 and (i & cmask) == cval:
                a0 = state[i]
                a1 = state[i | t]
                state[i] = u00 * a0 + u01 * a1
                state[i | t] = u10 * a0 + u11 * a1


def pauli_coefficients(double complex[:, ::1] m):
    """Return c[x, z] = Tr(P_xz^dagger M) / N for every Pauli string.

    ``P_xz = i^{|x&z|} X^x Z^z`` so that a qubit with both bits set carries Y.
    For each x the sums over z form a Walsh-Hadamard transform of the
    x-shifted diagonal, so the total cost is N^2 log N.
    """
    cdef Py_ssize_t n = m.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] c = out
    cdef long long x, z, j, h, k
    cdef double complex a, b
    cdef double complex ipow[4]
    ipow[0] = 1.0
    ipow[1] = -1j
    ipow[2] = -1.0
    ipow[3] = 1j
    with nogil:
        for x in range(n):
            for j in range(n):
                c[x, j] = m[j ^ x, j]
            h = 1
            while h < n:
                k = 0
                while k < n:
                    for j in range(k, k + h):
                        a = c[x, j]
                        b = c[x, j + h]
                        c[x, j] = a + b
                        c[x, j + h] = a - b
                    k += 2 * h
                h *= 2
            for z in range(n):
                # conj(i^k) = (-i)^k
                c[x, z] = ipow[__builtin_popcountll(<unsigned long long>(x & z)) & 3] * c[x, z] / n
    return out
