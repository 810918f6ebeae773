"""Hot loops over basis indices.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version with the same signature.  The module-level names point at one of the
two, chosen at import time by the ``FALQON_FACTOR_KERNELS`` environment
variable (``numba`` or ``numpy``; default ``numba`` when numba imports).

Index convention: bit ``b`` of a basis index is the value of the qubit whose
*index mask* is ``1 << b``.  Conversion from qubit numbers happens in the
callers, never here.
"""
from __future__ import annotations

import os

import numpy as np

# ---------------------------------------------------------------- numpy path


def _parity_np(values):
    return (np.bitwise_count(values) & 1).astype(np.int64)


def zdiag_numpy(dim, masks, coeffs):
    idx = np.arange(dim, dtype=np.int64)
    out = np.zeros(dim, dtype=np.float64)
    for mask, coeff in zip(masks, coeffs):
        out += coeff * (1 - 2 * _parity_np(idx & mask))
    return out


def apply_1q_numpy(psi, bit, u):
    """In-place 2x2 gate on index bit ``bit`` of a (dim, batch) array."""
    if not psi.flags.c_contiguous:
        raise ValueError("apply_1q needs a C-contiguous array")
    dim, batch = psi.shape
    view = psi.reshape(dim >> (bit + 1), 2, 1 << bit, batch)
    a = view[:, 0].copy()
    b = view[:, 1]
    view[:, 0] = u[0, 0] * a + u[0, 1] * b
    view[:, 1] = u[1, 0] * a + u[1, 1] * b


def pauli_expect_pure_numpy(psi, xmasks, zmasks, nys, coeffs):
    idx = np.arange(psi.shape[0], dtype=np.int64)
    total = 0j
    for x, z, ny, c in zip(xmasks, zmasks, nys, coeffs):
        sign = 1 - 2 * _parity_np(idx & z)
        total += c * (1j ** ny) * np.sum(np.conj(psi[idx ^ x]) * sign * psi)
    return total


def pauli_expect_mixed_numpy(rho, xmasks, zmasks, nys, coeffs):
    idx = np.arange(rho.shape[0], dtype=np.int64)
    total = 0j
    for x, z, ny, c in zip(xmasks, zmasks, nys, coeffs):
        sign = 1 - 2 * _parity_np(idx & z)
        total += c * (1j ** ny) * np.sum(sign * rho[idx, idx ^ x])
    return total


# ---------------------------------------------------------------- numba path

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

if njit is not None:

    @njit(cache=True)
    def _parity_nb(v):
        p = 0
        while v:
            v &= v - 1
            p ^= 1
        return p

    @njit(cache=True)
    def zdiag_numba(dim, masks, coeffs):
        out = np.zeros(dim, dtype=np.float64)
        for m in range(dim):
            acc = 0.0
            for t in range(masks.shape[0]):
                if _parity_nb(m & masks[t]):
                    acc -= coeffs[t]
                else:
                    acc += coeffs[t]
            out[m] = acc
        return out

    @njit(cache=True)
    def apply_1q_numba(psi, bit, u):
        dim, batch = psi.shape
        stride = 1 << bit
        u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
        for i in range(dim):
            if i & stride:
                continue
            j = i | stride
            for c in range(batch):
                a = psi[i, c]
                b = psi[j, c]
                psi[i, c] = u00 * a + u01 * b
                psi[j, c] = u10 * a + u11 * b

    @njit(cache=True)
    def _ipow(ny):
        r = ny & 3
        if r == 0:
            return 1.0 + 0.0j
        if r == 1:
            return 1.0j
        if r == 2:
            return -1.0 + 0.0j
        return -1.0j

    @njit(cache=True)
    def pauli_expect_pure_numba(psi, xmasks, zmasks, nys, coeffs):
        total = 0.0j
        for t in range(xmasks.shape[0]):
            x = xmasks[t]
            z = zmasks[t]
            acc = 0.0j
            for m in range(psi.shape[0]):
                v = np.conj(psi[m ^ x]) * psi[m]
                if _parity_nb(m & z):
                    acc -= v
                else:
                    acc += v
            total += coeffs[t] * _ipow(nys[t]) * acc
        return total

    @njit(cache=True)
    def pauli_expect_mixed_numba(rho, xmasks, zmasks, nys, coeffs):
        total = 0.0j
        for t in range(xmasks.shape[0]):
            x = xmasks[t]
            z = zmasks[t]
            acc = 0.0j
            for m in range(rho.shape[0]):
                v = rho[m, m ^ x]
                if _parity_nb(m & z):
                    acc -= v
                else:
                    acc += v
            total += coeffs[t] * _ipow(nys[t]) * acc
        return total


NUMBA_AVAILABLE = njit is not None

_requested = os.environ.get("FALQON_FACTOR_KERNELS", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"FALQON_FACTOR_KERNELS must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if (_requested == "numba" and NUMBA_AVAILABLE) else "numpy"

if BACKEND == "numba":
    zdiag = zdiag_numba
    apply_1q = apply_1q_numba
    pauli_expect_pure = pauli_expect_pure_numba
    pauli_expect_mixed = pauli_expect_mixed_numba
else:
    zdiag = zdiag_numpy
    apply_1q = apply_1q_numpy
    pauli_expect_pure = pauli_expect_pure_numpy
    pauli_expect_mixed = pauli_expect_mixed_numpy
