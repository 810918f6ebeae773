"""Digital-analog synthesis of diagonal two-body unitaries.

Free evolution under the always-on couplings

    H_free = sum_{i<j} (pi J_ij / 2) z_i z_j  -  pi sum_i nu_i z_i

is interleaved with pi pulses.  In the toggling frame a segment whose
qubits carry flip parities ``f`` sees pair ``(i, j)`` with sign
``(-1)^(f_i + f_j)``, so a target ``sum a_ij z_i z_j`` applied for ``dt``
needs non-negative durations with

    sum_seg sign_ij(seg) * (pi J_ij / 2) * t_seg = a_ij * dt.

Over all ``2^(n-1)`` parity patterns the sign vectors average to zero and
span the pair space, so every target is reachable; the LP picks the
shortest total time.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import linprog

from .pauli import ZPolynomial, qubits_of, index_mask
from .simulator import QuantumState, RfModel

_X = np.array([[0, 1], [1, 0]], dtype=complex)


class DaqcError(RuntimeError):
    """No non-negative schedule reproduces the requested target."""


@dataclass(frozen=True)
class DaqcSegment:
    pulses: tuple[int, ...]  # pi pulses applied before this free evolution
    duration: float          # seconds


@dataclass(frozen=True)
class DaqcSchedule:
    n_qubits: int
    couplings: np.ndarray = field(repr=False)   # J_ij in Hz, symmetric
    segments: tuple[DaqcSegment, ...]
    final_pulses: tuple[int, ...] = ()
    offsets: np.ndarray | None = field(default=None, repr=False)  # nu_i in Hz

    @property
    def durations(self) -> list[float]:
        return [s.duration for s in self.segments]

    @property
    def total_time(self) -> float:
        return float(sum(self.durations))

    def to_json(self) -> dict:
        return {
            "kind": "daqc",
            "n_qubits": self.n_qubits,
            "couplings_hz": np.asarray(self.couplings).tolist(),
            "offsets_hz": None if self.offsets is None else np.asarray(self.offsets).tolist(),
            "segments": [{"pulses": list(s.pulses), "duration_s": s.duration} for s in self.segments],
            "final_pulses": list(self.final_pulses),
        }

    @classmethod
    def from_json(cls, data) -> "DaqcSchedule":
        return cls(
            int(data["n_qubits"]),
            np.asarray(data["couplings_hz"], dtype=float),
            tuple(DaqcSegment(tuple(s["pulses"]), float(s["duration_s"])) for s in data["segments"]),
            tuple(data.get("final_pulses", ())),
            None if data.get("offsets_hz") is None else np.asarray(data["offsets_hz"], dtype=float),
        )


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def _gray_patterns(n: int) -> list[tuple[int, ...]]:
    # qubit 0 never flips; Gray order keeps one pulse between neighbours
    out = []
    for g in range(1 << (n - 1)):
        code = g ^ (g >> 1)
        out.append((0,) + tuple((code >> (n - 2 - k)) & 1 for k in range(n - 1)))
    return out


def daqc_schedule(couplings, target: ZPolynomial, dt: float, offsets=None) -> DaqcSchedule:
    J = np.asarray(couplings, dtype=float)
    n = target.n_qubits
    if J.shape != (n, n):
        raise ValueError("coupling matrix must be n x n")
    J = np.triu(J, 1) + np.triu(J, 1).T if not np.allclose(J, J.T) else J
    wanted = {}
    for mask, coeff in target.terms:
        order = mask.bit_count()
        if order == 0:
            continue
        if order != 2:
            raise ValueError("DAQC target may only hold two-body ZZ terms")
        wanted[qubits_of(mask)] = coeff
    patterns = _gray_patterns(n) if n > 1 else [(0,)]
    rows, rhs = [], []
    for i, j in _pairs(n):
        a = wanted.get((i, j), 0.0)
        if J[i, j] == 0.0:
            if a != 0.0:
                raise DaqcError(f"pair ({i + 1},{j + 1}) needs a ZZ term but J is zero")
            continue
        rows.append([(1 - 2 * ((f[i] + f[j]) % 2)) * math.pi * J[i, j] / 2 for f in patterns])
        rhs.append(a * dt)
    durations = np.zeros(len(patterns))
    if rows and any(rhs):
        A, b = np.array(rows), np.array(rhs)
        if dt < 0:
            raise DaqcError("negative evolution time")
        res = linprog(np.ones(len(patterns)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        if res.status != 0:
            raise DaqcError(f"no non-negative schedule: {res.message} (target {wanted}, dt {dt})")
        # polish on the LP support; the basic columns are independent
        support = np.flatnonzero(res.x > 1e-12 * max(res.x.max(), 1e-300))
        sol, *_ = np.linalg.lstsq(A[:, support], b, rcond=None)
        if (sol < -1e-15).any() or np.abs(A[:, support] @ sol - b).max() > 1e-12 * max(1.0, np.abs(b).max()):
            raise DaqcError(f"schedule polishing failed: residual {np.abs(A[:, support] @ sol - b).max():.3e}")
        durations[support] = np.clip(sol, 0.0, None)
    segments = []
    prev = (0,) * n
    for f, t in zip(patterns, durations):
        if t == 0.0:
            continue
        flips = tuple(k for k in range(n) if f[k] != prev[k])
        segments.append(DaqcSegment(flips, float(t)))
        prev = f
    final = tuple(k for k in range(n) if prev[k])
    return DaqcSchedule(n, J, tuple(segments), final, None if offsets is None else np.asarray(offsets, dtype=float))


def _free_diagonal(schedule: DaqcSchedule) -> np.ndarray:
    n = schedule.n_qubits
    J = schedule.couplings
    terms = [(1 << i | 1 << j, math.pi * J[i, j] / 2) for i, j in _pairs(n) if J[i, j] != 0.0]
    if schedule.offsets is not None:
        terms += [(1 << i, -math.pi * schedule.offsets[i]) for i in range(n) if schedule.offsets[i] != 0.0]
    return ZPolynomial(n, tuple(terms)).diagonal


def _kron_on(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in range(n):
        out = np.kron(out, ops.get(k, np.eye(2, dtype=complex)))
    return out


def pulse_unitary(schedule: DaqcSchedule, qubits: Sequence[int], scale: float = 1.0, nu1: float | None = None) -> np.ndarray:
    """Pi pulse about x on ``qubits`` with flip angle ``pi * scale``.

    With finite ``nu1`` the pulse lasts ``1/(2 nu1)`` and the couplings act
    during it; offsets are ignored while the pulse is on.
    """
    n = schedule.n_qubits
    if not qubits:
        return np.eye(1 << n, dtype=complex)
    angle = math.pi * scale
    if nu1 is None:
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        r = np.array([[c, -1j * s], [-1j * s, c]])
        return _kron_on(n, {k: r for k in qubits})
    tau = 1.0 / (2.0 * nu1)
    h = sum(_kron_on(n, {k: _X}) for k in qubits) * (angle / (2 * tau))
    J = schedule.couplings
    zz = ZPolynomial(n, tuple((1 << i | 1 << j, math.pi * J[i, j] / 2) for i, j in _pairs(n) if J[i, j] != 0.0))
    return expm(-1j * tau * (h + np.diag(zz.diagonal)))


_CACHE: dict[int, tuple[DaqcSchedule, dict]] = {}


def daqc_unitary(schedule: DaqcSchedule, scale: float = 1.0, nu1: float | None = None) -> np.ndarray:
    """Composed schedule unitary, memoised per schedule object (read-only result)."""
    hit = _CACHE.get(id(schedule))
    if hit is None or hit[0] is not schedule:
        if len(_CACHE) >= 16:
            _CACHE.pop(next(iter(_CACHE)))
        hit = _CACHE[id(schedule)] = (schedule, {})
    key = (float(scale), None if nu1 is None else float(nu1))
    if key not in hit[1]:
        u = _compose(schedule, scale, nu1)
        u.setflags(write=False)
        hit[1][key] = u
    return hit[1][key]


def _compose(schedule: DaqcSchedule, scale: float, nu1: float | None) -> np.ndarray:
    n = schedule.n_qubits
    diag = _free_diagonal(schedule)
    u = np.eye(1 << n, dtype=complex)
    for seg in schedule.segments:
        u = pulse_unitary(schedule, seg.pulses, scale, nu1) @ u
        u = np.exp(-1j * seg.duration * diag)[:, None] * u
    return pulse_unitary(schedule, schedule.final_pulses, scale, nu1) @ u


def unitary_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Phase-insensitive ``|Tr(u^dagger v)|^2 / d^2``."""
    d = u.shape[0]
    return float(abs(np.trace(u.conj().T @ v)) ** 2 / d**2)


def ensemble_fidelity(schedule: DaqcSchedule, target: ZPolynomial, dt: float, rf: RfModel) -> float:
    ideal = np.diag(np.exp(-1j * dt * target.diagonal))
    return sum(w * unitary_fidelity(ideal, daqc_unitary(schedule, s, rf.nu1)) for s, w in rf.members)


def apply_daqc(state: QuantumState, schedule: DaqcSchedule, rf: RfModel | None = None) -> QuantumState:
    """Run the pulse schedule on every ensemble member and average.

    A pure state with a single member stays pure; otherwise the result is the
    weighted mixture of the member evolutions.
    """
    rf = rf or RfModel()
    if schedule.n_qubits != state.n_qubits:
        raise ValueError("schedule qubit count does not match the state")
    if len(rf.members) == 1 and not state.mixed:
        u = daqc_unitary(schedule, rf.members[0][0], rf.nu1)
        return QuantumState(state.n_qubits, u @ state.data)
    rho = state.to_density()
    out = np.zeros_like(rho)
    for s, w in rf.members:
        u = daqc_unitary(schedule, s, rf.nu1)
        out += w * (u @ rho @ u.conj().T)
    return QuantumState(state.n_qubits, out, True, state.deviation, state.kappa)


def synthetic_couplings(n: int, base: float = 50.0) -> np.ndarray:
    """Deterministic stand-in couplings (Hz) for runs without device data."""
    J = np.zeros((n, n))
    for i, j in _pairs(n):
        J[i, j] = J[j, i] = base + 10.0 * ((7 * i + 3 * j) % 5)
    return J
