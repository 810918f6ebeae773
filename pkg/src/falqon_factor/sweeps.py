"""Parameter sweeps fanned out over a process pool.

Jobs are plain tuples, results come back through ``Executor.map`` and are
therefore in submission order whatever the scheduling.  Every row carries
the seed of the run that produced it.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

from .runner import Problem, build_problem, finite_or_inf, run_config

NOISE_HEADER = ["algorithm", "dtheta", "dphi", "seed", "j", "beta", "energy", "p_sol"]
RFI_HEADER = ["nu1", "rfi", "realization", "seed", "min_energy", "final_energy", "final_p_sol"]
STEPSIZE_HEADER = ["c", "dtheta", "seed", "j", "beta", "energy", "p_sol"]


@lru_cache(maxsize=8)
def _problem(instance_json: str) -> Problem:
    return build_problem({"instance": json.loads(instance_json)})


def _problem_for(cfg: dict) -> Problem:
    return _problem(json.dumps(cfg["instance"], sort_keys=True))


def _trajectory_job(job):
    cfg, algorithm, noise, tags = job
    rec = run_config(cfg, _problem_for(cfg), algorithm=algorithm, noise=noise)
    return [tags + [j, rec.beta[j], rec.energy[j], rec.p_sol[j]] for j in range(len(rec))]


def _rfi_job(job):
    cfg, tags = job
    rec = run_config(cfg, _problem_for(cfg))
    return [tags + [min(rec.energy), rec.energy[-1], rec.p_sol[-1]]]


def _map(fn, jobs: list, workers: int | None) -> list:
    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def noise_cells(cfg: dict) -> list[tuple[float, float]]:
    sw = cfg["sweep"]
    if sw["paired"]:
        if len(sw["dtheta"]) != len(sw["dphi"]):
            raise ValueError("paired noise grids need equal-length dtheta and dphi lists")
        return list(zip(sw["dtheta"], sw["dphi"]))
    return list(itertools.product(sw["dtheta"], sw["dphi"]))


def sweep_noise(cfg: dict, workers: int | None = None) -> list[list]:
    """Long-format rows ``algorithm, dtheta, dphi, seed, j, beta, energy, p_sol``."""
    jobs = [
        (cfg, alg, {"dtheta": dth, "dphi": dph, "seed": seed}, [alg, dth, dph, seed])
        for alg in cfg["sweep"]["algorithms"]
        for dth, dph in noise_cells(cfg)
        for seed in cfg["seeds"]
    ]
    return [row for rows in _map(_trajectory_job, jobs, workers) for row in rows]


def sweep_rfi(cfg: dict, workers: int | None = None) -> list[list]:
    """Minimum FALQON energy per ``(nu1, rfi)`` cell."""
    jobs = []
    for nu1, rfi in itertools.product(cfg["sweep"]["nu1"], cfg["sweep"]["rfi"]):
        for seed in cfg["seeds"]:
            cell = json.loads(json.dumps(cfg))
            cell["rf"] = {"nu1": nu1, "rfi": rfi, "n_points": (cfg["rf"] or {}).get("n_points", 7)}
            cell["noise"]["seed"] = seed
            jobs.append((cell, [finite_or_inf(nu1), rfi, cfg["problem_realization"], seed]))
    return [row for rows in _map(_rfi_job, jobs, workers) for row in rows]


def sweep_stepsize(cfg: dict, workers: int | None = None) -> list[list]:
    """Seeded FALQON trajectories per ``(c, dtheta)`` cell."""
    jobs = []
    for c, dth in itertools.product(cfg["sweep"]["c"], cfg["sweep"]["dtheta"]):
        cell = json.loads(json.dumps(cfg))
        cell["falqon"]["c"] = c
        for seed in cfg["seeds"]:
            jobs.append((cell, "falqon", {"dtheta": dth, "seed": seed}, [c, dth, seed]))
    return [row for rows in _map(_trajectory_job, jobs, workers) for row in rows]


def rows_to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    return buf.getvalue()
