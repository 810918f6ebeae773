"""Oracle suite: every claim is re-derived by brute force or dense matrices."""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .daqc import daqc_schedule, daqc_unitary, unitary_fidelity
from .encoder import CatalogEntry, brute_force_ground_states, load_catalog, verify_truncation
from .pauli import ZPolynomial, commutator_with_drive, default_drive_weights, drive_matrix, tomography_groups
from .simulator import QuantumState, expectation_commutator

LEVEL_TOL = 1e-12
TOMOGRAPHY_TOL = 1e-10
COMMUTATOR_TOL = 1e-12
DAQC_INFIDELITY = 1e-9


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def check_ground_set(entry: CatalogEntry) -> Check:
    """Exactly two ground states at the recorded level, decoding to ``(p, q)`` and ``(q, p)``."""
    e0, ground = brute_force_ground_states(entry.hamiltonian)
    decoded = {entry.rule.decode(s) for s in ground}
    p, q = entry.factors
    ok = len(ground) == 2 and decoded == {(p, q), (q, p)}
    if entry.ground_energy is not None:
        ok = ok and abs(e0 - entry.ground_energy) <= LEVEL_TOL
    return Check(f"ground set {entry.key}", ok, f"E0={e0:g} states={sorted(ground)} decodes={sorted(decoded)}")


def check_truncations(catalog) -> list[Check]:
    out = []
    for n in sorted({k[0] for k in catalog}):
        if (n, "full") in catalog and (n, "truncated") in catalog:
            ok = verify_truncation(catalog[(n, "full")].hamiltonian, catalog[(n, "truncated")].hamiltonian)
            out.append(Check(f"truncation {n}", ok, "ground sets equal" if ok else "ground sets differ"))
    return out


def random_states(n_qubits: int, count: int, seed: int = 0) -> list[QuantumState]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
        out.append(QuantumState(n_qubits, v / np.linalg.norm(v)))
    return out


def check_tomography(entry: CatalogEntry, count: int = 100, seed: int = 0) -> Check:
    c = commutator_with_drive(entry.hamiltonian)
    groups = tomography_groups(c)
    worst = 0.0
    for st in random_states(entry.hamiltonian.n_qubits, count, seed):
        worst = max(worst, abs(expectation_commutator(st, c, "direct") - expectation_commutator(st, c, "tomography", groups)))
    return Check(f"tomography {entry.key}", worst <= TOMOGRAPHY_TOL, f"max |direct - tomography| = {worst:.2e}")


def dense_commutator(h: ZPolynomial, weights=None) -> np.ndarray:
    weights = default_drive_weights(h.n_qubits) if weights is None else weights
    hp, hd = h.to_matrix(), drive_matrix(weights)
    return 1j * (hp @ hd - hd @ hp)


def check_commutator(entry: CatalogEntry) -> Check:
    h = entry.hamiltonian
    dense = dense_commutator(h)
    c = commutator_with_drive(h)
    rebuilt = sum((g.to_matrix() for g in tomography_groups(c)), np.zeros_like(dense))
    err = max(np.abs(c.to_matrix() - dense).max(), np.abs(rebuilt - dense).max())
    return Check(f"commutator {entry.key}", err <= COMMUTATOR_TOL, f"max entry error {err:.2e}")


def random_two_body(n: int, rng: np.random.Generator) -> ZPolynomial:
    terms = []
    for i in range(n):
        for j in range(i + 1, n):
            terms.append((1 << i | 1 << j, float(rng.uniform(-1, 1))))
    return ZPolynomial(n, tuple(terms))


def random_couplings(n: int, rng: np.random.Generator) -> np.ndarray:
    J = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            J[i, j] = J[j, i] = float(rng.uniform(20, 200)) * rng.choice([-1, 1])
    return J


def check_daqc(trials: int = 12, seed: int = 0, dt: float = 0.2) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        n = 2 + t % 3
        target = random_two_body(n, rng)
        sched = daqc_schedule(random_couplings(n, rng), target, dt)
        ideal = np.diag(np.exp(-1j * dt * target.diagonal))
        worst = max(worst, 1.0 - unitary_fidelity(ideal, daqc_unitary(sched)))
    return Check("daqc round trip", worst <= DAQC_INFIDELITY, f"worst infidelity {worst:.2e} over {trials} targets")


def run_suite(catalog_path=None) -> list[Check]:
    """Raises the loader's schema error for malformed catalogs."""
    catalog = load_catalog(catalog_path) if catalog_path else load_catalog()
    checks: list[Check] = []
    entries = [catalog[k] for k in sorted(catalog)]
    checks += [check_ground_set(e) for e in entries]
    checks += check_truncations(catalog)
    small = [e for e in entries if e.hamiltonian.n_qubits <= 5]
    checks += [check_tomography(e) for e in small]
    checks += [check_commutator(e) for e in small]
    checks.append(check_daqc())
    return checks


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result  detail"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<6}  {c.detail}")
    return "\n".join(lines)
