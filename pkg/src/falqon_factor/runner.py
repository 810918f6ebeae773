"""Resolved run configurations and single-run dispatch shared by the CLI and sweeps."""
from __future__ import annotations

import copy
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as fio
from .baselines import QaoaSchedule, RampSchedule, load_schedule, run_adiabatic, run_qaoa
from .daqc import DaqcError, daqc_schedule, synthetic_couplings
from .encoder import DecodingRule, catalog_hamiltonian, encode, load_catalog, solution_states
from .falqon import FalqonConfig, TrajectoryRecord, run_falqon
from .pauli import ZPolynomial, basis_label
from .simulator import NoiseModel, RfModel, init_state


class ConfigError(ValueError):
    """The configuration is inconsistent; reported as a usage error."""


DEFAULTS: dict = {
    "command": "factor",
    "instance": {"n": 551, "source": "catalog", "variant": "full", "l_p": None, "l_q": None},
    "algorithm": "falqon",
    "backend": "pure",
    "initial_state": "uniform",
    "epsilon": 1.0,
    "kappa": None,
    "drive_weights": None,
    "falqon": {
        "c": 0.25,
        "dt": 0.2,
        "max_iters": 22,
        "beta0": 0.0,
        "seed_kick": 0.01,
        "stall_threshold": 1e-12,
        "measurement": "direct",
        "layer_order": "problem_first",
        "stop_p_sol": None,
        "stop_on_factors": False,
        "record_probs": True,
    },
    "noise": {"dtheta": 0.0, "dphi": 0.0, "seed": 0},
    "rf": None,
    "problem_realization": None,
    "daqc": {"couplings_hz": None, "offsets_hz": None},
    "adiabatic": {"steps": None, "dt": None, "schedule_file": None},
    "qaoa": {"layers": None, "gamma_max": 1.0, "beta_max": 1.0, "schedule_file": None},
    "sweep": {
        "algorithms": ["falqon", "adiabatic", "qaoa"],
        "dtheta": [0.0, 0.05, 0.1, 0.2, 0.3],
        "dphi": [0.0, 0.05, 0.1, 0.2, 0.3],
        "paired": True,
        "nu1": [250.0, 500.0, 1000.0, 2000.0, 5000.0, None],
        "rfi": [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
        "c": [0.25, 0.75],
        "iterations": None,
    },
    "seeds": [0],
    "workers": None,
    "output_dir": None,
}

# commands whose iteration count defaults differ from a single factor run
_SWEEP_ITERATIONS = {"sweep-noise": 22, "sweep-rfi": 100, "sweep-stepsize": 22}
_SWEEP_SEEDS = {"sweep-noise": 20, "sweep-stepsize": 10}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(user: dict | None = None, command: str | None = None) -> dict:
    """Schema-check ``user`` and fill every default so the result is self-contained."""
    user = {} if user is None else user
    fio.validate(user, "config")
    cfg = _merge(DEFAULTS, user)
    if command is not None:
        cfg["command"] = command
    cmd = cfg["command"]
    if cfg["sweep"]["iterations"] is None and cmd in _SWEEP_ITERATIONS:
        cfg["sweep"]["iterations"] = _SWEEP_ITERATIONS[cmd]
    if cmd.startswith("sweep") and cfg["sweep"]["iterations"] is not None:
        cfg["falqon"]["max_iters"] = cfg["sweep"]["iterations"]
    sweep_user = user.get("sweep", {})
    if cmd == "sweep-stepsize" and "dtheta" not in sweep_user:
        cfg["sweep"]["dtheta"] = [0.0, 0.1]
    if "seeds" not in user and cmd in _SWEEP_SEEDS:
        cfg["seeds"] = list(range(_SWEEP_SEEDS[cmd]))
    if cfg["problem_realization"] is None:
        cfg["problem_realization"] = "daqc" if cmd == "sweep-rfi" else "exact"
    steps = cfg["falqon"]["max_iters"] + 1
    cfg["adiabatic"]["steps"] = cfg["adiabatic"]["steps"] or steps
    cfg["adiabatic"]["dt"] = cfg["adiabatic"]["dt"] or cfg["falqon"]["dt"]
    cfg["qaoa"]["layers"] = cfg["qaoa"]["layers"] or steps
    if cfg["rf"] is not None:
        cfg["rf"] = _merge({"nu1": None, "rfi": 0.0, "n_points": 7}, cfg["rf"])
    fio.validate(cfg, "config")
    return cfg


# ------------------------------------------------------------------ problem


@dataclass(frozen=True)
class Problem:
    n: int
    hamiltonian: ZPolynomial
    rule: DecodingRule
    solutions: frozenset
    label: str


def build_problem(cfg: dict, catalog_path=None) -> Problem:
    inst = cfg["instance"]
    n = int(inst["n"])
    if n % 2 == 0:
        raise ConfigError("n must be odd")
    if inst.get("source", "catalog") == "catalog":
        catalog = load_catalog(catalog_path) if catalog_path else load_catalog()
        h, rule = catalog_hamiltonian(n, inst.get("variant", "full"), catalog)
        label = f"catalog:{n}:{inst.get('variant', 'full')}"
    else:
        h, rule, fi = encode(n, inst.get("l_p"), inst.get("l_q"))
        label = f"generic:{n}:{fi.l_p}x{fi.l_q}"
    return Problem(n, h, rule, solution_states(h, rule, n), label)


def initial_state(cfg: dict, n_qubits: int):
    kind, backend = cfg["initial_state"], cfg["backend"]
    if kind == "thermal":
        if backend == "pure":
            raise ConfigError("a thermal start needs the mixed or deviation backend")
        return init_state("thermal", n_qubits, epsilon=cfg["epsilon"], deviation=backend == "deviation", kappa=cfg["kappa"])
    if backend == "deviation":
        raise ConfigError("the deviation backend only supports the thermal start")
    state = init_state(kind, n_qubits)
    return state.as_mixed() if backend == "mixed" else state


def rf_model(cfg: dict) -> RfModel | None:
    rf = cfg.get("rf")
    if rf is None:
        return None
    return RfModel(rf["nu1"], rf["rfi"], rf["n_points"])


def problem_schedule(cfg: dict, h: ZPolynomial):
    if cfg["problem_realization"] != "daqc":
        return None
    J = cfg["daqc"]["couplings_hz"]
    J = synthetic_couplings(h.n_qubits) if J is None else np.asarray(J, dtype=float)
    try:
        return daqc_schedule(J, h, cfg["falqon"]["dt"], cfg["daqc"]["offsets_hz"])
    except (DaqcError, ValueError) as exc:
        raise ConfigError(f"DAQC realization unavailable: {exc}") from None


def falqon_config(cfg: dict) -> FalqonConfig:
    f = {k: v for k, v in cfg["falqon"].items() if k != "stop_on_factors"}
    return FalqonConfig(**f)


def baseline_schedule(cfg: dict, algorithm: str):
    sec = cfg[algorithm]
    if sec.get("schedule_file"):
        sched = load_schedule(sec["schedule_file"])
        wanted = RampSchedule if algorithm == "adiabatic" else QaoaSchedule
        if not isinstance(sched, wanted):
            raise ConfigError(f"{sec['schedule_file']} is not a {algorithm} schedule")
        return sched
    if algorithm == "adiabatic":
        return RampSchedule.linear(sec["steps"], sec["dt"])
    return QaoaSchedule.linear_ramp(sec["layers"], sec["gamma_max"], sec["beta_max"])


def _factor_stop(problem: Problem):
    def stop(probs: np.ndarray) -> bool:
        p, q = problem.rule.decode(int(np.argmax(probs)))
        return p * q == problem.n and 1 < p < problem.n
    return stop


def run_config(cfg: dict, problem: Problem | None = None, *, algorithm: str | None = None,
               noise: dict | None = None) -> TrajectoryRecord:
    """One trajectory for a resolved config; ``noise`` overrides ``cfg['noise']``."""
    problem = build_problem(cfg) if problem is None else problem
    h = problem.hamiltonian
    algorithm = algorithm or cfg["algorithm"]
    nz = dict(cfg["noise"], **(noise or {}))
    noise_model = NoiseModel(nz["dtheta"], nz["dphi"], nz["seed"])
    weights = cfg["drive_weights"]
    if weights is not None and len(weights) != h.n_qubits:
        raise ConfigError("drive_weights needs one entry per qubit")
    if algorithm == "falqon":
        state0 = initial_state(cfg, h.n_qubits)
        try:
            fc = falqon_config(cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        record = run_falqon(
            h, weights, state0, fc, noise_model,
            solution_states=problem.solutions,
            schedule=problem_schedule(cfg, h),
            rf=rf_model(cfg),
            stop_when=_factor_stop(problem) if cfg["falqon"]["stop_on_factors"] else None,
        )
    else:
        if cfg["problem_realization"] == "daqc":
            raise ConfigError(f"{algorithm} runs only with the exact problem realization")
        if cfg["initial_state"] != "uniform" or cfg["backend"] == "deviation":
            raise ConfigError(f"{algorithm} starts from the uniform state on the pure or mixed backend")
        runner = run_adiabatic if algorithm == "adiabatic" else run_qaoa
        record = runner(h, weights, baseline_schedule(cfg, algorithm), noise_model,
                        solution_states=problem.solutions, state0=initial_state(cfg, h.n_qubits))
    record.metadata.update({
        "instance": problem.label,
        "hamiltonian_sha256_16": fio.hamiltonian_digest(h),
        "seed": nz["seed"],
    })
    return record


# ------------------------------------------------------------------ reports


def factor_report(problem: Problem, probs: np.ndarray, tol: float = 1e-12) -> dict:
    """The two most probable basis states and their decodings.

    Success needs both to decode to a non-trivial factorization of ``n`` and
    a strict gap to the third state, so a flat distribution never passes.
    """
    order = np.argsort(-probs, kind="stable")
    top = [int(s) for s in order[:2]]
    rows = []
    for s in top:
        p, q = problem.rule.decode(s)
        rows.append({"state": basis_label(s, problem.hamiltonian.n_qubits), "probability": float(probs[s]),
                     "p": p, "q": q, "product_ok": p * q == problem.n and 1 < p < problem.n})
    third = float(probs[order[2]]) if len(order) > 2 else 0.0
    separated = len(top) == 2 and rows[1]["probability"] > third + tol
    factors = sorted({rows[0]["p"], rows[0]["q"]})
    return {
        "n": problem.n,
        "top_states": rows,
        "factors": factors,
        "success": all(r["product_ok"] for r in rows) and separated,
    }


def finite_or_inf(x) -> float:
    return math.inf if x is None else float(x)


def output_dir(cfg: dict, flag: str | None = None) -> Path:
    return Path(flag or cfg.get("output_dir") or os.environ.get("FALQON_FACTOR_OUT") or "falqon_out")
