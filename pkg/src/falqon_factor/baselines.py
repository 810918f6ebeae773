"""Reference dynamics with fixed schedules: a Trotterized linear ramp and QAOA.

Both start from the uniform superposition, the ground state of
``H_init = -H_d``, take control errors on the drive rotations only and log
the same trajectory rows as the feedback loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .falqon import TrajectoryRecord
from .pauli import ZPolynomial, default_drive_weights
from .simulator import (
    NoiseModel,
    QuantumState,
    apply_diagonal_phase,
    apply_gates,
    basis_probabilities,
    drive_gates,
    expectation_energy,
    init_state,
)


@dataclass(frozen=True)
class RampSchedule:
    dt: float
    s: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.s:
            raise ValueError("ramp needs at least one step")
        s = np.asarray(self.s, dtype=float)
        if not np.isfinite(s).all() or s.min() < 0 or s.max() > 1:
            raise ValueError("mixing parameters must lie in [0, 1]")
        if (np.diff(s) < 0).any():
            raise ValueError("mixing parameters must be non-decreasing")

    @classmethod
    def linear(cls, steps: int, dt: float) -> "RampSchedule":
        """``s_j = (j + 1) / steps``, ending at exactly 1."""
        if steps < 1:
            raise ValueError("ramp needs at least one step")
        return cls(dt, tuple((j + 1) / steps for j in range(steps)))

    @property
    def steps(self) -> int:
        return len(self.s)

    def to_json(self) -> dict:
        return {"kind": "ramp", "dt": self.dt, "steps": self.steps, "s": list(self.s)}

    @classmethod
    def from_json(cls, data: dict) -> "RampSchedule":
        if data.get("s"):
            if "steps" in data and data["steps"] != len(data["s"]):
                raise ValueError("steps does not match the length of s")
            return cls(float(data["dt"]), tuple(float(x) for x in data["s"]))
        if "steps" not in data:
            raise ValueError("ramp schedule needs steps or s")
        return cls.linear(int(data["steps"]), float(data["dt"]))


@dataclass(frozen=True)
class QaoaSchedule:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.betas):
            raise ValueError("gamma and beta lists differ in length")
        if not self.gammas:
            raise ValueError("QAOA needs at least one layer")
        if not all(math.isfinite(a) for a in self.gammas + self.betas):
            raise ValueError("QAOA angles must be finite")

    @property
    def p(self) -> int:
        return len(self.gammas)

    @classmethod
    def linear_ramp(cls, p: int, gamma_max: float, beta_max: float) -> "QaoaSchedule":
        """Discretised ramp: ``gamma`` grows and ``|beta|`` shrinks layer by layer.

        ``beta`` carries the sign of ``exp(+i (1-s) H_d dt)``, matching the
        adiabatic reference.
        """
        if p < 1:
            raise ValueError("QAOA needs at least one layer")
        fr = [(j + 0.5) / p for j in range(p)]
        return cls(tuple(gamma_max * f for f in fr), tuple(-beta_max * (1 - f) for f in fr))

    def to_json(self) -> dict:
        return {"kind": "qaoa", "layers": [{"gamma": g, "beta": b} for g, b in zip(self.gammas, self.betas)]}

    @classmethod
    def from_json(cls, data: dict) -> "QaoaSchedule":
        layers = data["layers"]
        return cls(tuple(float(x["gamma"]) for x in layers), tuple(float(x["beta"]) for x in layers))


def load_schedule(path) -> RampSchedule | QaoaSchedule:
    from .io import load_json_validated

    data = load_json_validated(Path(path), "schedule")
    if data["kind"] == "ramp":
        return RampSchedule.from_json(data)
    if data["kind"] == "qaoa":
        return QaoaSchedule.from_json(data)
    raise ValueError(f"{path}: a {data['kind']} schedule is not a baseline schedule")


def _layer(state, h_diag, gamma, beta, weights, noise, rng):
    state = apply_diagonal_phase(state, h_diag, gamma)
    dth, dph = (noise or NoiseModel()).draw(rng, len(weights))
    return apply_gates(state, drive_gates(beta, weights, dth, dph))


def _run(kind, h, drive_weights, pairs, noise, solution_states, state0, extra) -> TrajectoryRecord:
    weights = default_drive_weights(h.n_qubits) if drive_weights is None else tuple(drive_weights)
    if len(weights) != h.n_qubits:
        raise ValueError("one drive weight per qubit required")
    state = init_state("uniform", h.n_qubits) if state0 is None else state0
    if state.n_qubits != h.n_qubits:
        raise ValueError("state and Hamiltonian qubit counts differ")
    sol = sorted(solution_states)
    rng = noise.rng() if noise is not None else None
    diag = h.diagonal
    record = TrajectoryRecord(n_qubits=h.n_qubits)
    record.metadata = {
        "algorithm": kind,
        "drive_weights": list(weights),
        "noise": None if noise is None else noise.to_json(),
        "noise_injection": "drive rotations only",
        "initial_backend": state.backend,
        **extra,
    }
    for gamma, beta in pairs:
        state = _layer(state, diag, gamma, beta, weights, noise, rng)
        probs, p_sol = basis_probabilities(state, sol)
        record.append(beta, expectation_energy(state, h), p_sol, 0.0, probs)
    return record


def run_adiabatic(
    h: ZPolynomial,
    drive_weights: Sequence[float] | None,
    schedule: RampSchedule,
    noise: NoiseModel | None = None,
    *,
    solution_states: Iterable[int] = (),
    state0: QuantumState | None = None,
) -> TrajectoryRecord:
    """Step ``exp(-i (1-s) H_init dt) exp(-i s H_p dt)`` with ``H_init = -H_d``.

    The recorded ``beta`` is the applied drive amplitude ``-(1 - s) dt``.
    """
    pairs = [(s * schedule.dt, -(1.0 - s) * schedule.dt) for s in schedule.s]
    return _run("adiabatic", h, drive_weights, pairs, noise, solution_states, state0,
                {"schedule": schedule.to_json(), "initial_hamiltonian": "-H_d"})


def run_qaoa(
    h: ZPolynomial,
    drive_weights: Sequence[float] | None,
    schedule: QaoaSchedule,
    noise: NoiseModel | None = None,
    *,
    solution_states: Iterable[int] = (),
    state0: QuantumState | None = None,
) -> TrajectoryRecord:
    """Layers ``exp(-i beta_j H_d) exp(-i gamma_j H_p)`` from the uniform state."""
    return _run("qaoa", h, drive_weights, zip(schedule.gammas, schedule.betas), noise, solution_states, state0,
                {"schedule": schedule.to_json()})
