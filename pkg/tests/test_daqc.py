import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from falqon_factor.daqc import (
    DaqcError,
    DaqcSchedule,
    apply_daqc,
    daqc_schedule,
    daqc_unitary,
    ensemble_fidelity,
    synthetic_couplings,
    unitary_fidelity,
)
from falqon_factor.encoder import catalog_hamiltonian
from falqon_factor.io import validate
from falqon_factor.pauli import ZPolynomial
from falqon_factor.simulator import QuantumState, RfModel, init_state
from falqon_factor.verify import random_couplings, random_two_body


def ideal(target, dt):
    return np.diag(np.exp(-1j * dt * target.diagonal))


@given(st.integers(2, 4), st.integers(0, 10**6), st.floats(0.01, 1.0))
def test_schedule_reproduces_random_targets(n, seed, dt):
    rng = np.random.default_rng(seed)
    target = random_two_body(n, rng)
    sched = daqc_schedule(random_couplings(n, rng), target, dt)
    assert all(t > 0 for t in sched.durations)
    assert 1 - unitary_fidelity(ideal(target, dt), daqc_unitary(sched)) < 1e-9


def test_551_with_synthetic_couplings():
    h, _ = catalog_hamiltonian(551)
    sched = daqc_schedule(synthetic_couplings(3), h, 0.2)
    assert unitary_fidelity(ideal(h, 0.2), daqc_unitary(sched)) == pytest.approx(1.0, abs=1e-12)
    # an 80% flip angle breaks the refocusing
    assert unitary_fidelity(ideal(h, 0.2), daqc_unitary(sched, scale=0.8)) < 0.99


def test_finite_pulses_cost_fidelity():
    h, _ = catalog_hamiltonian(551)
    sched = daqc_schedule(synthetic_couplings(3), h, 0.2)
    f = [unitary_fidelity(ideal(h, 0.2), daqc_unitary(sched, nu1=nu)) for nu in (250.0, 1000.0, 5000.0)]
    assert f[0] < f[1] < f[2] < 1.0


def test_ensemble_fidelity_non_increasing_in_rfi():
    h, _ = catalog_hamiltonian(551)
    sched = daqc_schedule(synthetic_couplings(3), h, 0.2)
    fs = [ensemble_fidelity(sched, h, 0.2, RfModel(rfi=r)) for r in (0.0, 0.05, 0.1, 0.2, 0.3)]
    assert fs[0] == pytest.approx(1.0, abs=1e-12)
    assert all(a >= b - 1e-12 for a, b in zip(fs, fs[1:]))


def test_empty_target_gives_identity():
    sched = daqc_schedule(synthetic_couplings(3), ZPolynomial(3, ()), 0.2)
    assert sched.segments == () and sched.total_time == 0.0
    assert np.allclose(daqc_unitary(sched), np.eye(8))


def test_unreachable_targets_raise():
    J = synthetic_couplings(3)
    J[0, 1] = J[1, 0] = 0.0
    with pytest.raises(DaqcError):
        daqc_schedule(J, ZPolynomial.from_qubits(3, {(0, 1): 1.0}), 0.2)
    with pytest.raises(ValueError):
        daqc_schedule(synthetic_couplings(3), ZPolynomial.from_qubits(3, {(0, 1, 2): 1.0}), 0.2)


def test_single_member_pure_state_stays_pure():
    h, _ = catalog_hamiltonian(551)
    sched = daqc_schedule(synthetic_couplings(3), h, 0.2)
    out = apply_daqc(init_state("uniform", 3), sched)
    assert not out.mixed
    mixed = apply_daqc(init_state("uniform", 3), sched, RfModel(rfi=0.2))
    assert mixed.mixed and mixed.trace() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        apply_daqc(QuantumState(2, np.array([1, 0, 0, 0], dtype=complex)), sched)


def test_schedule_json_round_trip():
    h, _ = catalog_hamiltonian(9167, "truncated")
    sched = daqc_schedule(synthetic_couplings(5), h, 0.1)
    doc = sched.to_json()
    validate(doc, "schedule")
    back = DaqcSchedule.from_json(doc)
    assert back.segments == sched.segments and np.array_equal(back.couplings, sched.couplings)


def test_unitary_cache_is_read_only():
    h, _ = catalog_hamiltonian(551)
    sched = daqc_schedule(synthetic_couplings(3), h, 0.2)
    u = daqc_unitary(sched, 0.9, 500.0)
    assert daqc_unitary(sched, 0.9, 500.0) is u
    with pytest.raises(ValueError):
        u[0, 0] = 1.0
