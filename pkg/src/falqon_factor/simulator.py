"""Register states and the evolution/measurement primitives used by every loop.

A :class:`QuantumState` is either a pure amplitude vector or a density
matrix.  In deviation mode the matrix holds only the traceless part of an
NMR-like state; readouts are then taken from ``I/2^n + kappa * deviation``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .pauli import PauliSum, ZPolynomial, tomography_groups, QUARTER_X, index_mask

NORM_TOL = 1e-12


@dataclass
class QuantumState:
    n_qubits: int
    data: np.ndarray
    mixed: bool = False
    deviation: bool = False
    kappa: float = 1.0

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def backend(self) -> str:
        if self.deviation:
            return "deviation"
        return "mixed" if self.mixed else "pure"

    def copy(self) -> "QuantumState":
        return QuantumState(self.n_qubits, self.data.copy(), self.mixed, self.deviation, self.kappa)

    def to_density(self) -> np.ndarray:
        if self.mixed:
            return self.data
        return np.outer(self.data, self.data.conj())

    def as_mixed(self) -> "QuantumState":
        if self.mixed:
            return self.copy()
        return QuantumState(self.n_qubits, self.to_density(), True)

    def trace(self) -> float:
        if self.mixed:
            return float(np.trace(self.data).real)
        return float(np.vdot(self.data, self.data).real)

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the emulated density matrix (positivity monitor)."""
        rho = self.to_density()
        if self.deviation:
            rho = np.eye(self.dim) / self.dim + self.kappa * rho
        return float(np.linalg.eigvalsh(rho).min())

    def to_json(self) -> dict:
        out = {"n_qubits": self.n_qubits, "backend": self.backend}
        if self.mixed:
            out["diagonal"] = [float(v) for v in np.real(np.diag(self.data))]
        else:
            out["amplitudes"] = [[float(v.real), float(v.imag)] for v in self.data]
        return out


@dataclass(frozen=True)
class NoiseModel:
    """Per-pulse control errors, uniform on ``[-amplitude, +amplitude]``.

    Every drive layer draws one flip-angle error and one phase error per
    qubit, whether or not the amplitudes are zero, so streams stay aligned
    across noise amplitudes for a fixed seed.
    """

    dtheta: float = 0.0
    dphi: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.dtheta < 0 or self.dphi < 0:
            raise ValueError("noise amplitudes must be non-negative")

    @property
    def silent(self) -> bool:
        return self.dtheta == 0 and self.dphi == 0

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def draw(self, rng: np.random.Generator | None, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
        if rng is None:
            return np.zeros(n_qubits), np.zeros(n_qubits)
        r = rng.uniform(-1.0, 1.0, size=(2, n_qubits))
        dth = self.dtheta * r[0] if self.dtheta else np.zeros(n_qubits)
        dph = self.dphi * r[1] if self.dphi else np.zeros(n_qubits)
        return dth, dph

    def to_json(self) -> dict:
        return {"dtheta": self.dtheta, "dphi": self.dphi, "seed": self.seed, "distribution": "uniform"}


@dataclass(frozen=True)
class RfModel:
    """Control amplitude limit and inhomogeneity as a discrete scale ensemble.

    ``nu1=None`` means instantaneous pulses.  ``members`` defaults to an
    evenly spaced grid of ``n_points`` scales over ``[1 - rfi, 1 + rfi]``
    with equal weights; ``rfi = 0`` collapses to a single member.
    """

    nu1: float | None = None
    rfi: float = 0.0
    n_points: int = 7
    members: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if self.nu1 is not None and not self.nu1 > 0:
            raise ValueError("nu1 must be positive")
        if not 0 <= self.rfi < 1:
            raise ValueError("rfi must lie in [0, 1)")
        if not self.members:
            if self.rfi == 0 or self.n_points == 1:
                members = ((1.0, 1.0),)
            else:
                scales = np.linspace(1 - self.rfi, 1 + self.rfi, self.n_points)
                members = tuple((float(s), 1.0 / self.n_points) for s in scales)
            object.__setattr__(self, "members", members)
        if any(s <= 0 for s, _ in self.members) or any(w < 0 for _, w in self.members):
            raise ValueError("scales must be positive and weights non-negative")
        if abs(sum(w for _, w in self.members) - 1.0) > 1e-12:
            raise ValueError("ensemble weights must sum to 1")

    @property
    def ideal(self) -> bool:
        return self.nu1 is None and self.members == ((1.0, 1.0),)

    def to_json(self) -> dict:
        return {"nu1": self.nu1, "rfi": self.rfi, "members": [list(m) for m in self.members]}


# ------------------------------------------------------------------ states


def _rotation_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def init_state(
    kind: str,
    n_qubits: int,
    *,
    epsilon: float = 1.0,
    pulse: bool = True,
    deviation: bool = False,
    kappa: float | None = None,
    amplitudes: Sequence[complex] | np.ndarray | None = None,
) -> QuantumState:
    """Prepare ``zero``, ``uniform``, ``thermal`` or ``explicit`` states.

    ``thermal`` is ``(I + epsilon sum z_i)/2^n`` followed (when ``pulse``) by
    a 90 degree y rotation of every qubit.  With ``deviation=True`` only
    ``sum z_i / 2^n`` is stored and readouts use ``kappa`` (default
    ``1/n_qubits``, the largest scale keeping the emulated state positive).
    """
    dim = 1 << n_qubits
    if kind == "zero":
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
        return QuantumState(n_qubits, psi)
    if kind == "uniform":
        return QuantumState(n_qubits, np.full(dim, dim ** -0.5, dtype=complex))
    if kind == "thermal":
        if not 0 < epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        zsum = np.zeros(dim)
        for k in range(n_qubits):
            zsum += ZPolynomial(n_qubits, ((1 << k, 1.0),)).diagonal
        if deviation:
            rho = np.diag(zsum / dim).astype(complex)
            k = 1.0 / n_qubits if kappa is None else float(kappa)
            state = QuantumState(n_qubits, rho, mixed=True, deviation=True, kappa=k)
        else:
            rho = np.diag((1.0 + epsilon * zsum) / dim).astype(complex)
            state = QuantumState(n_qubits, rho, mixed=True)
        if pulse:
            ry = _rotation_y(math.pi / 2)
            state = apply_gates(state, [ry] * n_qubits)
        return state
    if kind == "explicit":
        if amplitudes is None:
            raise ValueError("explicit state needs amplitudes")
        arr = np.asarray(amplitudes, dtype=complex)
        if arr.ndim == 1:
            if arr.shape != (dim,):
                raise ValueError("amplitude vector has the wrong length")
            if abs(np.vdot(arr, arr).real - 1.0) > NORM_TOL:
                raise ValueError("explicit amplitudes are not normalised")
            return QuantumState(n_qubits, arr.copy())
        if arr.shape != (dim, dim):
            raise ValueError("density matrix has the wrong shape")
        if np.abs(arr - arr.conj().T).max() > NORM_TOL or abs(np.trace(arr).real - 1.0) > NORM_TOL:
            raise ValueError("explicit density matrix must be Hermitian with unit trace")
        return QuantumState(n_qubits, arr.copy(), mixed=True)
    raise ValueError(f"unknown initial state kind {kind!r}")


# ------------------------------------------------------------------ evolution


def apply_diagonal_phase(state: QuantumState, diag: np.ndarray, dt: float) -> QuantumState:
    phases = np.exp(-1j * dt * np.asarray(diag))
    out = state.copy()
    if state.mixed:
        out.data *= np.outer(phases, phases.conj())
    else:
        out.data *= phases
    return out


def apply_problem_phase(state: QuantumState, h: ZPolynomial, dt: float, schedule=None, rf: RfModel | None = None) -> QuantumState:
    """``exp(-i h dt)``: exact diagonal phases, or a DAQC pulse schedule."""
    if h.n_qubits != state.n_qubits:
        raise ValueError("Hamiltonian and state qubit counts differ")
    if schedule is None:
        return apply_diagonal_phase(state, h.diagonal, dt)
    from .daqc import apply_daqc

    if schedule.n_qubits != state.n_qubits:
        raise ValueError("schedule qubit count does not match the state")
    return apply_daqc(state, schedule, rf or RfModel())


def apply_gates(state: QuantumState, gates: Sequence[np.ndarray | None]) -> QuantumState:
    """Apply one 2x2 unitary per qubit (``None`` skips a qubit)."""
    n = state.n_qubits
    if len(gates) != n:
        raise ValueError("one gate per qubit required")
    out = state.copy()
    if not state.mixed:
        buf = out.data.reshape(-1, 1)
        for k, u in enumerate(gates):
            if u is not None:
                _kernels.apply_1q(buf, n - 1 - k, np.ascontiguousarray(u, dtype=complex))
        return out
    rho = np.ascontiguousarray(out.data)
    for k, u in enumerate(gates):
        if u is not None:
            _kernels.apply_1q(rho, n - 1 - k, np.ascontiguousarray(u, dtype=complex))
    # rho U^dagger = (U rho^dagger)^dagger
    rho = np.ascontiguousarray(rho.conj().T)
    for k, u in enumerate(gates):
        if u is not None:
            _kernels.apply_1q(rho, n - 1 - k, np.ascontiguousarray(u, dtype=complex))
    out.data = np.ascontiguousarray(rho.conj().T)
    return out


def rotation_xy(angle: float, phase: float = 0.0) -> np.ndarray:
    """``exp(-i angle/2 (cos(phase) x + sin(phase) y))``."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array(
        [[c, -1j * s * complex(math.cos(phase), -math.sin(phase))],
         [-1j * s * complex(math.cos(phase), math.sin(phase)), c]],
        dtype=complex,
    )


def drive_gates(beta: float, drive_weights: Sequence[float], dtheta=None, dphi=None, scale: float = 1.0) -> list[np.ndarray]:
    """Per-qubit pulses of the drive layer ``exp(-i beta sum w_i x_i)``.

    Qubit ``i`` is flipped by ``scale * (2 w_i beta + dtheta_i)`` about an
    axis at phase ``dphi_i`` in the x-y plane.
    """
    n = len(drive_weights)
    dtheta = np.zeros(n) if dtheta is None else dtheta
    dphi = np.zeros(n) if dphi is None else dphi
    return [
        rotation_xy(scale * (2.0 * w * beta + float(dtheta[i])), float(dphi[i]))
        for i, w in enumerate(drive_weights)
    ]


def apply_drive(
    state: QuantumState,
    beta: float,
    drive_weights: Sequence[float],
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
    scale: float = 1.0,
) -> QuantumState:
    """Drive layer with optional control errors.

    Pass a generator from ``noise.rng()`` to share one error stream across
    successive layers; without one a fresh stream seeded by ``noise.seed``
    is used for this single layer.
    """
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    if noise is not None and rng is None:
        rng = noise.rng()
    dth, dph = (noise or NoiseModel()).draw(rng if noise is not None else None, len(drive_weights))
    return apply_gates(state, drive_gates(beta, drive_weights, dth, dph, scale))


# ------------------------------------------------------------------ readout


def basis_probabilities(state: QuantumState, solution_states: Iterable[int] = ()) -> tuple[np.ndarray, float]:
    if state.mixed:
        probs = np.real(np.diag(state.data)).copy()
        if state.deviation:
            probs = 1.0 / state.dim + state.kappa * probs
    else:
        probs = np.abs(state.data) ** 2
    sol = list(solution_states)
    return probs, float(probs[sol].sum()) if sol else 0.0


def expectation_energy(state: QuantumState, h: ZPolynomial) -> float:
    if h.n_qubits != state.n_qubits:
        raise ValueError("Hamiltonian and state qubit counts differ")
    probs, _ = basis_probabilities(state)
    return float(np.dot(h.diagonal, probs))


def _pauli_direct(state: QuantumState, c: PauliSum) -> float:
    if not c.terms:
        return 0.0
    xs, zs, nys, cs = c.kernel_arrays()
    if state.mixed:
        val = _kernels.pauli_expect_mixed(np.ascontiguousarray(state.data), xs, zs, nys, cs)
        if state.deviation:
            val = state.kappa * val  # Pauli strings in C are traceless
    else:
        val = _kernels.pauli_expect_pure(state.data, xs, zs, nys, cs)
    return float(val.real)


def expectation_commutator(state: QuantumState, c: PauliSum, mode: str = "direct", groups=None) -> float:
    """``<C>`` by contraction, or by rotated diagonal tomography.

    Tomography rotates a copy of the state by ``R_k^dagger`` for every group
    and contracts the diagonal weights with the diagonal of ``D_k``.
    """
    if c.n_qubits != state.n_qubits:
        raise ValueError("observable and state qubit counts differ")
    if mode == "direct":
        return _pauli_direct(state, c)
    if mode != "tomography":
        raise ValueError(f"unknown measurement mode {mode!r}")
    groups = tomography_groups(c) if groups is None else groups
    r_dag = QUARTER_X.conj().T
    total = 0.0
    for g in groups:
        gates = [r_dag if j == g.qubit else None for j in range(state.n_qubits)]
        rotated = apply_gates(state, gates)
        probs, _ = basis_probabilities(rotated)
        if rotated.deviation:
            probs = probs - 1.0 / rotated.dim  # D_k is traceless
        total += float(np.dot(g.diagonal.diagonal, probs))
    return total


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """``|<a|b>|^2`` for pure states, ``Tr(rho sigma)`` once either is mixed."""
    if not a.mixed and not b.mixed:
        return float(abs(np.vdot(a.data, b.data)) ** 2)
    return float(np.real(np.trace(a.to_density() @ b.to_density())))
