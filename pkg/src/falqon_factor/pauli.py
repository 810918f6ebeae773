"""Diagonal Z-polynomials, single-Y Pauli sums and their dense oracles.

Qubits are numbered from 0 here and printed from 1 (``z1`` is qubit 0).
Qubit 0 is the most significant bit of a basis index, so the basis state
labelled ``011`` is index 3.  Masks on the public types are *qubit* masks
(bit ``k`` set means qubit ``k`` takes part); kernels want *index* masks,
which :func:`index_mask` produces.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels

MAX_DIAGONAL_QUBITS = 28
MAX_DENSE_QUBITS = 12

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def index_mask(mask: int, n_qubits: int) -> int:
    """Map a qubit mask onto basis-index bits (qubit 0 is the top bit)."""
    out = 0
    for k in range(n_qubits):
        if mask >> k & 1:
            out |= 1 << (n_qubits - 1 - k)
    return out


def qubits_of(mask: int) -> tuple[int, ...]:
    return tuple(k for k in range(mask.bit_length()) if mask >> k & 1)


def mask_of(qubits: Iterable[int]) -> int:
    mask = 0
    for k in qubits:
        if mask >> k & 1:
            raise ValueError(f"qubit {k} repeated in monomial")
        mask |= 1 << k
    return mask


def basis_label(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b") if n_qubits else ""


def _fmt_coeff(c: float) -> str:
    return repr(float(c))


@dataclass(frozen=True)
class ZPolynomial:
    """Sum of Pauli-Z monomials, ``sum_S a_S prod_{k in S} z_k``.

    ``terms`` is a sorted tuple of ``(qubit_mask, coefficient)`` with distinct
    masks and no zero coefficients.  Mask 0 is the identity term.
    """

    n_qubits: int
    terms: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        limit = 1 << self.n_qubits
        merged: dict[int, float] = {}
        for mask, coeff in self.terms:
            mask = int(mask)
            coeff = float(coeff)
            if not 0 <= mask < limit:
                raise ValueError(f"mask {mask:#b} does not fit in {self.n_qubits} qubits")
            if not math.isfinite(coeff):
                raise ValueError("coefficients must be finite")
            merged[mask] = merged.get(mask, 0.0) + coeff
        clean = tuple(sorted((m, c) for m, c in merged.items() if c != 0.0))
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_qubits(cls, n_qubits: int, monomials: Mapping[Sequence[int], float] | Iterable) -> "ZPolynomial":
        """Build from ``{(0, 1): 0.25, ...}`` or ``[((0, 1), 0.25), ...]`` (0-based qubits)."""
        items = monomials.items() if isinstance(monomials, Mapping) else monomials
        return cls(n_qubits, tuple((mask_of(q), c) for q, c in items))

    @classmethod
    def zero(cls, n_qubits: int) -> "ZPolynomial":
        return cls(n_qubits, ())

    @property
    def identity_coeff(self) -> float:
        return dict(self.terms).get(0, 0.0)

    @property
    def max_order(self) -> int:
        return max((m.bit_count() for m, _ in self.terms), default=0)

    def without_identity(self) -> "ZPolynomial":
        return ZPolynomial(self.n_qubits, tuple(t for t in self.terms if t[0] != 0))

    def __add__(self, other: "ZPolynomial") -> "ZPolynomial":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        return ZPolynomial(self.n_qubits, self.terms + other.terms)

    def scaled(self, factor: float) -> "ZPolynomial":
        return ZPolynomial(self.n_qubits, tuple((m, c * factor) for m, c in self.terms))

    def kernel_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        masks = np.array([index_mask(m, self.n_qubits) for m, _ in self.terms], dtype=np.int64)
        coeffs = np.array([c for _, c in self.terms], dtype=np.float64)
        return masks, coeffs

    @functools.cached_property
    def diagonal(self) -> np.ndarray:
        """Read-only diagonal in the computational basis (see :func:`zpoly_diagonal`)."""
        if self.n_qubits > MAX_DIAGONAL_QUBITS:
            raise ValueError(f"diagonal limited to {MAX_DIAGONAL_QUBITS} qubits")
        masks, coeffs = self.kernel_arrays()
        diag = _kernels.zdiag(1 << self.n_qubits, masks, coeffs)
        diag.flags.writeable = False
        return diag

    def to_matrix(self) -> np.ndarray:
        _check_dense(self.n_qubits)
        return np.diag(self.diagonal).astype(complex)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mask, coeff in self.terms:
            ops = " ".join(f"z{k + 1}" for k in qubits_of(mask)) or "I"
            parts.append(f"{coeff:+g} {ops}")
        return " ".join(parts)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": [{"mask": m, "coeff": c} for m, c in self.terms],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ZPolynomial":
        return cls(int(data["n_qubits"]), tuple((int(t["mask"]), float(t["coeff"])) for t in data["terms"]))


def zpoly_diagonal(h: ZPolynomial) -> np.ndarray:
    """Diagonal entries ``e_m``; qubit value 0 contributes ``z = +1``."""
    return h.diagonal


@dataclass(frozen=True)
class PauliSum:
    """Real combination of Pauli strings ``(x_mask, y_mask, z_mask, coeff)``."""

    n_qubits: int
    terms: tuple[tuple[int, int, int, float], ...] = ()

    def __post_init__(self):
        limit = 1 << self.n_qubits
        merged: dict[tuple[int, int, int], float] = {}
        for x, y, z, coeff in self.terms:
            x, y, z = int(x), int(y), int(z)
            if x & y or x & z or y & z:
                raise ValueError("x, y and z masks of a Pauli string must be disjoint")
            if (x | y | z) >= limit:
                raise ValueError("mask does not fit in n_qubits")
            merged[(x, y, z)] = merged.get((x, y, z), 0.0) + float(coeff)
        clean = tuple(sorted((*k, c) for k, c in merged.items() if c != 0.0))
        object.__setattr__(self, "terms", clean)

    def __len__(self) -> int:
        return len(self.terms)

    def kernel_arrays(self):
        n = self.n_qubits
        xs = np.array([index_mask(x | y, n) for x, y, _, _ in self.terms], dtype=np.int64)
        zs = np.array([index_mask(z | y, n) for _, y, z, _ in self.terms], dtype=np.int64)
        nys = np.array([y.bit_count() for _, y, _, _ in self.terms], dtype=np.int64)
        cs = np.array([c for *_, c in self.terms], dtype=np.float64)
        return xs, zs, nys, cs

    def to_matrix(self) -> np.ndarray:
        _check_dense(self.n_qubits)
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for x, y, z, coeff in self.terms:
            factors = []
            for k in range(self.n_qubits):
                if x >> k & 1:
                    factors.append(_X)
                elif y >> k & 1:
                    factors.append(_Y)
                elif z >> k & 1:
                    factors.append(_Z)
                else:
                    factors.append(_I2)
            out += coeff * _kron_all(factors)
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for x, y, z, coeff in self.terms:
            ops = []
            for k in range(self.n_qubits):
                for name, mask in (("x", x), ("y", y), ("z", z)):
                    if mask >> k & 1:
                        ops.append(f"{name}{k + 1}")
            parts.append(f"{coeff:+g} {' '.join(ops) or 'I'}")
        return " ".join(parts)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": [{"x": x, "y": y, "z": z, "coeff": c} for x, y, z, c in self.terms],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PauliSum":
        return cls(
            int(data["n_qubits"]),
            tuple((int(t["x"]), int(t["y"]), int(t["z"]), float(t["coeff"])) for t in data["terms"]),
        )


def default_drive_weights(n_qubits: int) -> tuple[float, ...]:
    return (0.5,) * n_qubits


def commutator_with_drive(h: ZPolynomial, drive_weights: Sequence[float] | None = None) -> PauliSum:
    """Symbolic ``C = i[H_p, H_d]`` for ``H_d = sum_i w_i x_i``.

    Each monomial ``a_S z_S`` yields ``-2 w_i a_S y_i z_{S-i}`` for every
    ``i`` in ``S``; ``[z_i, x_i] = 2i y_i`` and all other factors commute.
    """
    weights = default_drive_weights(h.n_qubits) if drive_weights is None else tuple(drive_weights)
    if len(weights) != h.n_qubits:
        raise ValueError("one drive weight per qubit required")
    terms = []
    for mask, coeff in h.terms:
        for k in qubits_of(mask):
            if weights[k] == 0.0:
                continue
            bit = 1 << k
            terms.append((0, bit, mask & ~bit, -2.0 * weights[k] * coeff))
    return PauliSum(h.n_qubits, tuple(terms))


def drive_matrix(drive_weights: Sequence[float]) -> np.ndarray:
    n = len(drive_weights)
    _check_dense(n)
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for k, w in enumerate(drive_weights):
        out += w * _kron_all([_X if j == k else _I2 for j in range(n)])
    return out


# 90 degree rotation about x: R = exp(-i pi/4 x)
QUARTER_X = np.array([[1, -1j], [-1j, 1]], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class TomographyGroup:
    """Terms of ``C`` with their Y on ``qubit``: ``C_k = R_k D_k R_k^dagger``."""

    qubit: int
    diagonal: ZPolynomial
    rotation: np.ndarray = field(default=QUARTER_X, repr=False, compare=False)

    def rotation_matrix(self) -> np.ndarray:
        n = self.diagonal.n_qubits
        return _kron_all([self.rotation if j == self.qubit else _I2 for j in range(n)])

    def to_matrix(self) -> np.ndarray:
        r = self.rotation_matrix()
        return r @ self.diagonal.to_matrix() @ r.conj().T


def tomography_groups(c: PauliSum) -> list[TomographyGroup]:
    """Split a single-Y Pauli sum into rotated diagonal observables.

    ``R z_k R^dagger = -y_k`` for ``R = exp(-i pi/4 x_k)``, so the term
    ``a y_k z_rest`` becomes ``-a z_k z_rest`` inside ``D_k``.
    """
    grouped: dict[int, list[tuple[int, float]]] = {}
    for x, y, z, coeff in c.terms:
        if x or y.bit_count() != 1:
            raise ValueError("tomography needs exactly one Y and no X in every term")
        k = y.bit_length() - 1
        grouped.setdefault(k, []).append((z | y, -coeff))
    return [TomographyGroup(k, ZPolynomial(c.n_qubits, tuple(grouped[k]))) for k in sorted(grouped)]


def _kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def _check_dense(n_qubits: int) -> None:
    if n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"dense rendering limited to {MAX_DENSE_QUBITS} qubits")
