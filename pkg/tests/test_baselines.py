import json

import numpy as np
import pytest
from scipy.linalg import expm

from falqon_factor.baselines import QaoaSchedule, RampSchedule, load_schedule, run_adiabatic, run_qaoa
from falqon_factor.falqon import FalqonConfig, run_falqon
from falqon_factor.io import SchemaError
from falqon_factor.pauli import drive_matrix
from falqon_factor.simulator import NoiseModel, init_state


def test_linear_ramp_ends_at_one():
    r = RampSchedule.linear(4, 0.2)
    assert r.s == (0.25, 0.5, 0.75, 1.0) and r.steps == 4
    assert RampSchedule.from_json(r.to_json()) == r
    assert RampSchedule.from_json({"kind": "ramp", "dt": 0.2, "steps": 4}) == r
    for bad in (dict(dt=0.0, s=(1.0,)), dict(dt=0.1, s=()), dict(dt=0.1, s=(0.5, 0.2)), dict(dt=0.1, s=(1.5,))):
        with pytest.raises(ValueError):
            RampSchedule(**bad)


def test_qaoa_linear_ramp():
    q = QaoaSchedule.linear_ramp(4, 0.4, 0.8)
    assert q.gammas == pytest.approx((0.05, 0.15, 0.25, 0.35))
    assert q.betas == pytest.approx((-0.7, -0.5, -0.3, -0.1))
    assert QaoaSchedule.from_json(q.to_json()) == q
    with pytest.raises(ValueError):
        QaoaSchedule((0.1,), ())
    with pytest.raises(ValueError):
        QaoaSchedule((float("inf"),), (0.1,))


def test_adiabatic_matches_dense_product(h551):
    h, _, sol = h551
    sched = RampSchedule.linear(5, 0.3)
    rec = run_adiabatic(h, None, sched, solution_states=sol)
    hp, hd = h.to_matrix(), drive_matrix([0.5] * 3)
    psi = np.full(8, 8**-0.5, dtype=complex)
    for s in sched.s:
        psi = expm(1j * (1 - s) * 0.3 * hd) @ expm(-1j * s * 0.3 * hp) @ psi
    assert rec.energy[-1] == pytest.approx(np.vdot(psi, hp @ psi).real, abs=1e-12)
    assert rec.beta[0] == pytest.approx(-(1 - 0.2) * 0.3)
    assert rec.metadata["noise_injection"] == "drive rotations only"


def test_slow_ramp_reaches_the_ground_state(h551):
    h, _, sol = h551
    rec = run_adiabatic(h, None, RampSchedule.linear(1000, 0.02), solution_states=sol)
    assert rec.energy[-1] == pytest.approx(-0.748428951088292, abs=1e-12)
    assert rec.p_sol[-1] == pytest.approx(0.9984289510882918, abs=1e-12)


def test_falqon_beats_the_equal_depth_ramp(h551):
    h, _, sol = h551
    fq = run_falqon(h, None, init_state("uniform", 3), FalqonConfig(max_iters=21), solution_states=sol)
    ad = run_adiabatic(h, None, RampSchedule.linear(22, 0.2), solution_states=sol)
    assert len(fq) == len(ad) == 22
    assert fq.energy[-1] < ad.energy[-1]


def test_qaoa_ramp_lowers_the_energy(h551):
    h, _, sol = h551
    rec = run_qaoa(h, None, QaoaSchedule.linear_ramp(10, 0.4, 0.4), solution_states=sol)
    assert rec.energy[-1] < -0.3 and rec.p_sol[-1] > 0.6
    assert rec.commutator == [0.0] * 10


def test_baseline_noise_is_seeded(h551):
    h, _, _ = h551
    sched = QaoaSchedule.linear_ramp(6, 0.4, 0.4)
    a = run_qaoa(h, None, sched, NoiseModel(0.1, 0.1, 3))
    b = run_qaoa(h, None, sched, NoiseModel(0.1, 0.1, 3))
    assert a.energy == b.energy
    assert a.energy != run_qaoa(h, None, sched).energy


def test_guards(h551):
    h, _, _ = h551
    with pytest.raises(ValueError):
        run_qaoa(h, [0.5, 0.5], QaoaSchedule.linear_ramp(2, 0.1, 0.1))
    with pytest.raises(ValueError):
        run_adiabatic(h, None, RampSchedule.linear(2, 0.1), state0=init_state("uniform", 2))


def test_load_schedule(tmp_path):
    p = tmp_path / "q.json"
    p.write_text(json.dumps(QaoaSchedule.linear_ramp(3, 0.5, 0.5).to_json()))
    assert load_schedule(p).p == 3
    p.write_text(json.dumps({"kind": "ramp", "dt": -1}))
    with pytest.raises(SchemaError):
        load_schedule(p)


def test_single_full_step_is_a_diagonal_phase(h551):
    h, _, sol = h551
    rec = run_adiabatic(h, None, RampSchedule(0.2, (1.0,)), solution_states=sol)
    assert rec.energy == [pytest.approx(0.0, abs=1e-15)] and rec.p_sol[0] == pytest.approx(0.25)


def test_trivial_qaoa_layers(h551):
    h, _, sol = h551
    rec = run_qaoa(h, None, QaoaSchedule((0.0,), (0.0,)), solution_states=sol)
    assert rec.energy[0] == pytest.approx(0.0, abs=1e-15) and rec.p_sol[0] == pytest.approx(0.25)
    for beta in (-1.3, 0.4, 2.0):
        rec = run_qaoa(h, None, QaoaSchedule((0.0,), (beta,)), solution_states=sol)
        assert rec.energy[0] == pytest.approx(0.0, abs=1e-15)


def test_zero_angles_give_constant_trajectories(h551):
    h, _, _ = h551
    rec = run_qaoa(h, None, QaoaSchedule((0.0,) * 5, (0.0,) * 5), state0=init_state("explicit", 3, amplitudes=[
        0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0]))
    assert len(set(rec.energy)) == 1


def test_norm_is_preserved(h551):
    h, _, _ = h551
    rec = run_qaoa(h, None, QaoaSchedule.linear_ramp(20, 1.0, 1.0), NoiseModel(0.2, 0.2, 1))
    assert abs(rec.final_probs.sum() - 1.0) < 1e-12
    for probs in rec.probs:
        assert abs(probs.sum() - 1.0) < 1e-12


# frozen from reference runs
def test_pinned_baseline_endpoints(h551):
    h, _, sol = h551
    rec = run_adiabatic(h, None, RampSchedule.linear(100, 0.2), solution_states=sol)
    assert rec.energy[-1] == pytest.approx(-0.7486032928908468, abs=1e-12)
    assert rec.energy[-1] < rec.energy[0]
    rec = run_qaoa(h, None, QaoaSchedule.linear_ramp(10, 0.4, 0.4), solution_states=sol)
    assert rec.energy[-1] == pytest.approx(-0.3598372847535824, abs=1e-12)
    assert rec.p_sol[-1] == pytest.approx(0.6098372847535826, abs=1e-12)
