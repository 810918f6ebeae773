"""Measurement-feedback loop: ``beta_{j+1} = c * <i[H_p, H_d]>_j``.

Row 0 of a trajectory is the state after the first layer, which uses the
configured ``beta0``.  Every later layer applies ``exp(-i H_p dt)`` and then
the drive with the amplitude fed back from the previous measurement.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .pauli import PauliSum, ZPolynomial, basis_label, commutator_with_drive, default_drive_weights, tomography_groups
from .simulator import (
    NoiseModel,
    QuantumState,
    RfModel,
    apply_gates,
    apply_problem_phase,
    basis_probabilities,
    drive_gates,
    expectation_commutator,
    expectation_energy,
)


@dataclass(frozen=True)
class FalqonConfig:
    c: float = 0.25
    dt: float = 0.2
    max_iters: int = 22
    beta0: float = 0.0
    seed_kick: float = 0.01
    stall_threshold: float = 1e-12
    measurement: str = "direct"
    layer_order: str = "problem_first"
    stop_p_sol: float | None = None
    record_probs: bool = True

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.stall_threshold < 0:
            raise ValueError("stall threshold must be non-negative")
        if self.measurement not in ("direct", "tomography"):
            raise ValueError("measurement must be 'direct' or 'tomography'")
        if self.layer_order not in ("problem_first", "drive_first"):
            raise ValueError("layer_order must be 'problem_first' or 'drive_first'")


@dataclass
class TrajectoryRecord:
    beta: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    p_sol: list[float] = field(default_factory=list)
    commutator: list[float] = field(default_factory=list)
    probs: list[np.ndarray] = field(default_factory=list)
    n_qubits: int = 0
    metadata: dict = field(default_factory=dict)
    last_probs: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.energy)

    def append(self, beta: float, energy: float, p_sol: float, commutator: float, probs: np.ndarray | None,
               keep_probs: bool = True) -> None:
        self.beta.append(float(beta))
        self.energy.append(float(energy))
        self.p_sol.append(float(p_sol))
        self.commutator.append(float(commutator))
        if probs is not None:
            self.last_probs = np.asarray(probs, dtype=float)
            if keep_probs:
                self.probs.append(self.last_probs)

    @property
    def final_probs(self) -> np.ndarray:
        if self.last_probs is None:
            raise ValueError("no probabilities were measured")
        return self.last_probs

    def beta_degrees(self, drive_weights: Sequence[float] | None = None) -> list[float]:
        """Net per-qubit flip angle ``2 w beta`` in degrees (mean weight)."""
        w = float(np.mean(drive_weights)) if drive_weights else 0.5
        return [math.degrees(2.0 * w * b) for b in self.beta]

    def to_csv(self, drive_weights: Sequence[float] | None = None) -> str:
        header = ["iter", "beta", "energy", "p_sol", "beta_deg"]
        if self.probs:
            header += [f"prob_{basis_label(i, self.n_qubits)}" for i in range(len(self.probs[0]))]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        degs = self.beta_degrees(drive_weights)
        for j in range(len(self)):
            row = [j, repr(self.beta[j]), repr(self.energy[j]), repr(self.p_sol[j]), repr(degs[j])]
            if self.probs:
                row += [repr(float(p)) for p in self.probs[j]]
            w.writerow(row)
        return buf.getvalue()


class _Register:
    """One state per RF ensemble member; readouts are weight-averaged."""

    def __init__(self, state: QuantumState, rf: RfModel | None):
        self.rf = rf or RfModel()
        self.members = [(w, s, state.copy()) for s, w in self.rf.members]
        self.n_qubits = state.n_qubits

    def problem(self, h: ZPolynomial, dt: float, schedule) -> None:
        if schedule is None:
            self.members = [(w, s, apply_problem_phase(st, h, dt)) for w, s, st in self.members]
            return
        self.members = [
            (w, s, apply_problem_phase(st, h, dt, schedule, RfModel(self.rf.nu1, members=((s, 1.0),))))
            for w, s, st in self.members
        ]

    def drive(self, beta: float, weights, dth, dph) -> None:
        self.members = [(w, s, apply_gates(st, drive_gates(beta, weights, dth, dph, s))) for w, s, st in self.members]

    def measure(self, h: ZPolynomial, c_obs: PauliSum, mode: str, groups, solutions) -> tuple[float, float, float, np.ndarray]:
        energy = comm = 0.0
        probs = np.zeros(1 << self.n_qubits)
        for w, _, st in self.members:
            energy += w * expectation_energy(st, h)
            comm += w * expectation_commutator(st, c_obs, mode, groups)
            probs += w * basis_probabilities(st)[0]
        sol = list(solutions)
        return energy, comm, float(probs[sol].sum()) if sol else 0.0, probs


def falqon_step(
    state,
    h: ZPolynomial,
    c_obs: PauliSum,
    beta_next: float,
    config: FalqonConfig,
    noise: NoiseModel | None = None,
    *,
    drive_weights: Sequence[float] | None = None,
    rng: np.random.Generator | None = None,
    solution_states: Iterable[int] = (),
    schedule=None,
    rf: RfModel | None = None,
):
    """One layer ``U_d(beta_next) U_p(dt)`` followed by the measurements.

    ``state`` may be a :class:`QuantumState` or an ensemble register from a
    running loop.  Returns ``(state, {"energy", "commutator", "p_sol", "probs"})``.
    """
    if not math.isfinite(beta_next):
        raise ValueError("beta must be finite")
    weights = default_drive_weights(h.n_qubits) if drive_weights is None else tuple(drive_weights)
    reg = state if isinstance(state, _Register) else _Register(state, rf)
    if noise is not None and rng is None:
        rng = noise.rng()
    dth, dph = (noise or NoiseModel()).draw(rng if noise is not None else None, h.n_qubits)
    if config.layer_order == "problem_first":
        reg.problem(h, config.dt, schedule)
        reg.drive(beta_next, weights, dth, dph)
    else:
        reg.drive(beta_next, weights, dth, dph)
        reg.problem(h, config.dt, schedule)
    groups = tomography_groups(c_obs) if config.measurement == "tomography" else None
    energy, comm, p_sol, probs = reg.measure(h, c_obs, config.measurement, groups, solution_states)
    out = reg if isinstance(state, _Register) else (reg.members[0][2] if len(reg.members) == 1 else reg)
    return out, {"energy": energy, "commutator": comm, "p_sol": p_sol, "probs": probs}


def run_falqon(
    h: ZPolynomial,
    drive_weights: Sequence[float] | None,
    state0: QuantumState,
    config: FalqonConfig = FalqonConfig(),
    noise: NoiseModel | None = None,
    *,
    solution_states: Iterable[int] = (),
    schedule=None,
    rf: RfModel | None = None,
    stop_when: Callable[[np.ndarray], bool] | None = None,
) -> TrajectoryRecord:
    """Iterate the feedback law for ``config.max_iters`` layers after row 0."""
    if state0.n_qubits != h.n_qubits:
        raise ValueError("state and Hamiltonian qubit counts differ")
    weights = default_drive_weights(h.n_qubits) if drive_weights is None else tuple(drive_weights)
    c_obs = commutator_with_drive(h, weights)
    solutions = sorted(solution_states)
    rng = noise.rng() if noise is not None else None
    reg = _Register(state0, rf)
    record = TrajectoryRecord(n_qubits=h.n_qubits)
    record.metadata = {
        "algorithm": "falqon",
        "config": asdict(config),
        "drive_weights": list(weights),
        "noise": None if noise is None else noise.to_json(),
        "rf": None if rf is None else rf.to_json(),
        "daqc": schedule is not None,
        "initial_backend": state0.backend,
        "seed_kick_applied": False,
        "stalled": False,
    }
    beta = config.beta0
    for j in range(config.max_iters + 1):
        reg, m = falqon_step(
            reg, h, c_obs, beta, config, noise,
            drive_weights=weights, rng=rng, solution_states=solutions, schedule=schedule,
        )
        record.append(beta, m["energy"], m["p_sol"], m["commutator"], m["probs"], config.record_probs)
        if j == config.max_iters:
            break
        if config.stop_p_sol is not None and m["p_sol"] >= config.stop_p_sol:
            record.metadata["stopped_early"] = j
            break
        if stop_when is not None and stop_when(m["probs"]):
            record.metadata["stopped_early"] = j
            break
        beta = config.c * m["commutator"]
        if j == 0 and abs(m["commutator"]) < config.stall_threshold:
            if config.seed_kick:
                beta = config.seed_kick
                record.metadata["seed_kick_applied"] = True
            else:
                record.metadata["stalled"] = True
                warnings.warn("FALQON stalled: <C> vanished at the first measurement and no kick is set")
    return record
