import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from falqon_factor.pauli import (
    QUARTER_X,
    PauliSum,
    ZPolynomial,
    basis_label,
    commutator_with_drive,
    drive_matrix,
    index_mask,
    mask_of,
    qubits_of,
    tomography_groups,
)

_Z = np.diag([1.0, -1.0]).astype(complex)
_Y = np.array([[0, -1j], [1j, 0]])


def kron_on(n, ops):
    out = np.ones((1, 1), dtype=complex)
    for k in range(n):
        out = np.kron(out, ops.get(k, np.eye(2)))
    return out


@st.composite
def zpolys(draw, max_qubits=4):
    n = draw(st.integers(1, max_qubits))
    terms = draw(st.lists(st.tuples(st.integers(0, (1 << n) - 1), st.integers(-4, 4).map(lambda k: k / 4)), max_size=8))
    return ZPolynomial(n, tuple(terms))


def test_label_ordering_puts_qubit_zero_on_top():
    assert basis_label(3, 3) == "011"
    # z1 is -1 on |100> (index 4) and +1 on |011>
    h = ZPolynomial.from_qubits(3, {(0,): 1.0})
    assert h.diagonal[4] == -1.0 and h.diagonal[3] == 1.0


def test_index_mask_reverses_bits():
    assert index_mask(0b001, 3) == 0b100
    assert index_mask(0b011, 3) == 0b110
    assert qubits_of(0b101) == (0, 2)
    assert mask_of([0, 2]) == 0b101
    with pytest.raises(ValueError):
        mask_of([1, 1])


def test_terms_merge_sort_and_drop_zeros():
    h = ZPolynomial(2, ((3, 1.0), (1, 0.5), (3, -1.0), (0, 2.0)))
    assert h.terms == ((0, 2.0), (1, 0.5))
    assert h.identity_coeff == 2.0
    assert h.without_identity().terms == ((1, 0.5),)


def test_rejects_bad_masks_and_coefficients():
    with pytest.raises(ValueError):
        ZPolynomial(2, ((4, 1.0),))
    with pytest.raises(ValueError):
        ZPolynomial(2, ((1, float("nan")),))


def test_printing_uses_one_based_names():
    h = ZPolynomial.from_qubits(3, {(0, 1): 0.25, (1, 2): -0.25})
    assert str(h) == "+0.25 z1 z2 -0.25 z2 z3"


def test_diagonal_is_read_only():
    h = ZPolynomial.from_qubits(2, {(0,): 1.0})
    with pytest.raises(ValueError):
        h.diagonal[0] = 3.0


@given(zpolys())
def test_diagonal_matches_dense_kron(h):
    dense = np.zeros((1 << h.n_qubits,) * 2, dtype=complex)
    for mask, c in h.terms:
        dense += c * kron_on(h.n_qubits, {k: _Z for k in qubits_of(mask)})
    assert np.allclose(np.diag(dense).real, h.diagonal, atol=1e-12)
    assert np.allclose(h.to_matrix(), dense, atol=1e-12)


@given(zpolys())
def test_zpoly_json_round_trip(h):
    assert ZPolynomial.from_json(h.to_json()) == h


@given(zpolys(), st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_commutator_matches_dense(h, w):
    weights = w[: h.n_qubits]
    hp, hd = h.to_matrix(), drive_matrix(weights)
    c = commutator_with_drive(h, weights)
    assert np.allclose(c.to_matrix(), 1j * (hp @ hd - hd @ hp), atol=1e-12)
    assert PauliSum.from_json(c.to_json()) == c


@given(zpolys())
def test_tomography_groups_rebuild_commutator(h):
    c = commutator_with_drive(h)
    rebuilt = sum((g.to_matrix() for g in tomography_groups(c)), np.zeros((1 << h.n_qubits,) * 2, dtype=complex))
    assert np.allclose(rebuilt, c.to_matrix(), atol=1e-12)


def test_quarter_turn_maps_z_to_minus_y():
    assert np.allclose(QUARTER_X @ _Z @ QUARTER_X.conj().T, -_Y)


def test_single_y_terms_only_for_tomography():
    with pytest.raises(ValueError):
        tomography_groups(PauliSum(2, ((1, 0, 0, 1.0),)))  # an X term
    with pytest.raises(ValueError):
        tomography_groups(PauliSum(2, ((0, 3, 0, 1.0),)))  # two Ys


def test_551_commutator_terms():
    h = ZPolynomial.from_qubits(3, {(0, 1): 0.25, (0, 2): 0.25, (1, 2): -0.25})
    c = commutator_with_drive(h)
    # each two-body term gives two single-Y strings with coefficient -2 * 0.5 * a
    assert len(c.terms) == 6
    assert sorted(abs(t[3]) for t in c.terms) == [0.25] * 6


def test_tomography_groups_for_551():
    """D_1 = 0.25 (z1 z2 + z1 z3), and likewise for the other two groups."""
    h = ZPolynomial.from_qubits(3, {(0, 1): 0.25, (0, 2): 0.25, (1, 2): -0.25})
    groups = {g.qubit: g.diagonal for g in tomography_groups(commutator_with_drive(h))}
    expected = {
        0: ZPolynomial.from_qubits(3, {(0, 1): 0.25, (0, 2): 0.25}),
        1: ZPolynomial.from_qubits(3, {(0, 1): 0.25, (1, 2): -0.25}),
        2: ZPolynomial.from_qubits(3, {(0, 2): 0.25, (1, 2): -0.25}),
    }
    assert groups == expected
