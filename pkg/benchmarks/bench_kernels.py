"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--qubits 12] [--repeat 20]

Both implementations are imported directly, so the environment switch does
not matter here.  The first numba call (compilation or cache load) is
excluded; results are checked for agreement before timing.
"""
import argparse
import time

import numpy as np

from falqon_factor import _kernels as K
from falqon_factor.encoder import catalog_hamiltonian
from falqon_factor.pauli import ZPolynomial, commutator_with_drive


def tiled(n):
    """The 9-qubit catalog instance copied onto every window of ``n`` qubits."""
    h, _ = catalog_hamiltonian(2106287, "full")
    if n < h.n_qubits:
        raise SystemExit(f"need at least {h.n_qubits} qubits")
    terms = tuple((m << s, c) for s in range(n - h.n_qubits + 1) for m, c in h.terms)
    return ZPolynomial(n, terms)


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not K.NUMBA_AVAILABLE:
        raise SystemExit("numba is not importable; nothing to compare")

    n = args.qubits
    dim = 1 << n
    rng = np.random.default_rng(1)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    u = np.array([[0.6, 0.8j], [0.8j, 0.6]])
    h = tiled(n)
    masks, coeffs = h.kernel_arrays()
    xs, zs, nys, cs = commutator_with_drive(h).kernel_arrays()
    rho_n = min(n, 10)
    rho = np.outer(psi[: 1 << rho_n], psi[: 1 << rho_n].conj())
    rho /= np.trace(rho)
    xr, zr, nyr, cr = commutator_with_drive(tiled(rho_n)).kernel_arrays()

    cases = {
        "zdiag": (lambda f: f(dim, masks, coeffs), K.zdiag_numpy, K.zdiag_numba),
        "apply_1q x n": (
            lambda f: [f(buf, b, u) for buf in [psi.copy().reshape(-1, 1)] for b in range(n)],
            K.apply_1q_numpy, K.apply_1q_numba,
        ),
        "pauli_expect_pure": (lambda f: f(psi, xs, zs, nys, cs), K.pauli_expect_pure_numpy, K.pauli_expect_pure_numba),
        f"pauli_expect_mixed ({rho_n}q)": (
            lambda f: f(rho, xr, zr, nyr, cr), K.pauli_expect_mixed_numpy, K.pauli_expect_mixed_numba,
        ),
    }
    print(f"{n} qubits, best of {args.repeat}")
    print(f"{'kernel':<26}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, (call, f_np, f_nb) in cases.items():
        a, b = call(f_np), call(f_nb)
        if not isinstance(a, list):
            assert np.allclose(a, b), name
        t_np = best_of(lambda: call(f_np), args.repeat)
        t_nb = best_of(lambda: call(f_nb), args.repeat)
        print(f"{name:<26}{1e3 * t_np:>10.3f}{1e3 * t_nb:>10.3f}{t_np / t_nb:>9.1f}")


if __name__ == "__main__":
    main()
