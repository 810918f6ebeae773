"""Biprime -> binary cost polynomial -> diagonal Ising Hamiltonian.

The cost is the sum of squared column constraints of long multiplication,

    f_m = sum_k p_{m-k} q_k + c_{m-1} - 2 c_m - n_m,

with the terminal bits of both factors pinned to 1.  Carries are unsigned
integers spread over as many binary variables as their column bound needs.
The carry out of the last column is not a variable: it must equal the bits
of ``n`` above that column.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pauli import ZPolynomial, basis_label, mask_of

MAX_ENUM_QUBITS = 24
GROUND_TOL = 1e-9

Monomial = frozenset


class CatalogError(KeyError):
    """Requested Hamiltonian is not in the catalog."""


class UnsupportedVariant(ValueError):
    pass


def bit_decompose(n: int) -> list[int]:
    """Bits of ``n``, least significant first."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return [(n >> i) & 1 for i in range(n.bit_length())]


def default_split(n: int) -> tuple[int, int]:
    """``l_p = l_q = round(l_n / 2)`` with halves rounded up."""
    half = (n.bit_length() + 1) // 2
    return half, half


@dataclass(frozen=True)
class FactorInstance:
    n: int
    l_p: int
    l_q: int

    def __post_init__(self):
        if self.n < 1 or self.n % 2 == 0:
            raise ValueError("n must be odd")
        if self.l_p < 2 or self.l_q < 2:
            raise ValueError("factor bit-lengths must be at least 2")
        if self.l_p + self.l_q not in (self.l_n, self.l_n + 1):
            raise ValueError(
                f"l_p + l_q = {self.l_p + self.l_q} inconsistent with l_n = {self.l_n}"
            )

    @classmethod
    def from_n(cls, n: int, l_p: int | None = None, l_q: int | None = None) -> "FactorInstance":
        if n % 2 == 0:
            raise ValueError("n must be odd")
        dp, dq = default_split(n)
        return cls(n, dp if l_p is None else l_p, dq if l_q is None else l_q)

    @property
    def bits(self) -> list[int]:
        return bit_decompose(self.n)

    @property
    def l_n(self) -> int:
        return self.n.bit_length()

    @property
    def last_column(self) -> int:
        return self.l_p + self.l_q - 2

    @property
    def p_vars(self) -> list[str]:
        return [f"p{i}" for i in range(1, self.l_p - 1)]

    @property
    def q_vars(self) -> list[str]:
        return [f"q{i}" for i in range(1, self.l_q - 1)]

    def factor_bit(self, which: str, i: int):
        """1 for a pinned terminal bit, else the variable name."""
        length = self.l_p if which == "p" else self.l_q
        return 1 if i in (0, length - 1) else f"{which}{i}"

    def column_products(self, m: int) -> list[tuple]:
        k_lo = max(0, m - self.l_p + 1)
        k_hi = min(m, self.l_q - 1)
        return [(self.factor_bit("p", m - k), self.factor_bit("q", k)) for k in range(k_lo, k_hi + 1)]

    @cached_property
    def carry_bounds(self) -> tuple[int, ...]:
        """Largest carry out of each column except the last.

        Column population plus the largest possible carry in, minus the fixed
        bit of ``n``, halved; propagated left to right.
        """
        bits = self.bits + [0] * (self.last_column + 2)
        bounds = []
        max_in = 0
        for m in range(self.last_column):
            max_sum = len(self.column_products(m)) + max_in
            max_in = max(0, (max_sum - bits[m]) // 2)
            bounds.append(max_in)
        return tuple(bounds)

    @cached_property
    def carry_widths(self) -> tuple[int, ...]:
        return tuple(b.bit_length() for b in self.carry_bounds)

    @cached_property
    def final_carry(self) -> int:
        return self.n >> (self.last_column + 1)

    def carry_vars(self, m: int) -> list[str]:
        if m < 0 or m >= self.last_column:
            return []
        return [f"c{m}_{b}" for b in range(self.carry_widths[m])]

    @cached_property
    def variable_layout(self) -> tuple[str, ...]:
        """Variables in qubit order: p bits, q bits, then carries by column."""
        carries = [v for m in range(self.last_column) for v in self.carry_vars(m)]
        return tuple(self.p_vars + self.q_vars + carries)

    @property
    def qubit_of(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.variable_layout)}

    def assignment(self, p: int, q: int) -> dict[str, int] | None:
        """Variable values (with consistent carries) encoding ``p*q``; None if not representable."""
        if p.bit_length() != self.l_p or q.bit_length() != self.l_q or p % 2 == 0 or q % 2 == 0:
            return None
        values = {v: (p >> int(v[1:])) & 1 for v in self.p_vars}
        values.update({v: (q >> int(v[1:])) & 1 for v in self.q_vars})
        carry = 0
        for m in range(self.last_column):
            s = sum(((p >> (m - k)) & 1) * ((q >> k) & 1) for k in range(self.l_q) if 0 <= m - k < self.l_p)
            s += carry
            carry = (s - ((p * q) >> m & 1)) // 2
            if carry.bit_length() > self.carry_widths[m]:
                return None
            for b, name in enumerate(self.carry_vars(m)):
                values[name] = (carry >> b) & 1
        return values

    def decoding_rule(self) -> "DecodingRule":
        q_of = self.qubit_of
        return DecodingRule(
            n_qubits=len(self.variable_layout),
            l_p=self.l_p,
            l_q=self.l_q,
            p_bits=tuple((q_of[v], False) for v in self.p_vars),
            q_bits=tuple((q_of[v], False) for v in self.q_vars),
        )


class BooleanPolynomial:
    """Multilinear integer polynomial over named 0/1 variables.

    ``terms`` maps a frozenset of variable names to its coefficient; the empty
    set is the constant.  Products reduce ``b*b = b`` automatically.
    """

    def __init__(self, terms: Mapping[frozenset, int] | None = None):
        self.terms: dict[frozenset, int] = {}
        for mono, c in (terms or {}).items():
            self._add(frozenset(mono), c)

    def _add(self, mono: frozenset, c: int) -> None:
        v = self.terms.get(mono, 0) + c
        if v:
            self.terms[mono] = v
        else:
            self.terms.pop(mono, None)

    @classmethod
    def constant(cls, c: int) -> "BooleanPolynomial":
        return cls({frozenset(): c})

    @classmethod
    def variable(cls, name: str, c: int = 1) -> "BooleanPolynomial":
        return cls({frozenset([name]): c})

    @property
    def variables(self) -> set[str]:
        return set().union(*self.terms) if self.terms else set()

    def __add__(self, other: "BooleanPolynomial") -> "BooleanPolynomial":
        out = BooleanPolynomial(self.terms)
        for mono, c in other.terms.items():
            out._add(mono, c)
        return out

    def __sub__(self, other: "BooleanPolynomial") -> "BooleanPolynomial":
        return self + other.scaled(-1)

    def scaled(self, k: int) -> "BooleanPolynomial":
        return BooleanPolynomial({m: c * k for m, c in self.terms.items()})

    def __mul__(self, other: "BooleanPolynomial") -> "BooleanPolynomial":
        out = BooleanPolynomial()
        for (m1, c1), (m2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            out._add(m1 | m2, c1 * c2)
        return out

    def evaluate(self, values: Mapping[str, int]) -> int:
        return sum(c for mono, c in self.terms.items() if all(values[v] for v in mono))

    def __eq__(self, other) -> bool:
        return isinstance(other, BooleanPolynomial) and self.terms == other.terms

    def __repr__(self) -> str:
        body = " + ".join(
            f"{c}*{'*'.join(sorted(m)) or '1'}" for m, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), sorted(t[0])))
        )
        return f"BooleanPolynomial({body or '0'})"


def _bit_poly(bit) -> BooleanPolynomial:
    return BooleanPolynomial.constant(bit) if isinstance(bit, int) else BooleanPolynomial.variable(bit)


def _carry_poly(instance: FactorInstance, m: int) -> BooleanPolynomial:
    if m < 0:
        return BooleanPolynomial()
    if m == instance.last_column:
        return BooleanPolynomial.constant(instance.final_carry)
    out = BooleanPolynomial()
    for b, name in enumerate(instance.carry_vars(m)):
        out = out + BooleanPolynomial.variable(name, 1 << b)
    return out


def column_constraints(instance: FactorInstance) -> list[BooleanPolynomial]:
    bits = instance.bits + [0] * (instance.last_column + 1)
    out = []
    for m in range(instance.last_column + 1):
        f = BooleanPolynomial.constant(-bits[m])
        for pb, qb in instance.column_products(m):
            f = f + _bit_poly(pb) * _bit_poly(qb)
        f = f + _carry_poly(instance, m - 1) - _carry_poly(instance, m).scaled(2)
        out.append(f)
    return out


def build_cost(instance: FactorInstance) -> BooleanPolynomial:
    """``E = sum_m f_m^2``; zero exactly on consistent factorizations."""
    last = instance.last_column
    max_in = instance.carry_bounds[-1] if instance.carry_bounds else 0
    n_last = (instance.n >> last) & 1
    if 2 * instance.final_carry + n_last > len(instance.column_products(last)) + max_in:
        raise ValueError(
            f"split ({instance.l_p}, {instance.l_q}) cannot produce {instance.n}: carry bound overflow"
        )
    cost = BooleanPolynomial()
    for f in column_constraints(instance):
        cost = cost + f * f
    return cost


def boolean_to_zpoly(poly: BooleanPolynomial, layout: Mapping[str, int] | Sequence[str], n_qubits: int | None = None) -> ZPolynomial:
    """Substitute ``b = (1 - z)/2``; basis bit 0 is ``z = +1``."""
    if not isinstance(layout, Mapping):
        layout = {v: i for i, v in enumerate(layout)}
    missing = poly.variables - set(layout)
    if missing:
        raise KeyError(f"unmapped variables: {sorted(missing)}")
    if n_qubits is None:
        n_qubits = max(layout.values(), default=-1) + 1
    acc: dict[int, float] = {}
    for mono, c in poly.terms.items():
        qubits = [layout[v] for v in mono]
        scale = c / (1 << len(qubits))
        for r in range(len(qubits) + 1):
            sign = -1.0 if r % 2 else 1.0
            for sub in itertools.combinations(qubits, r):
                mask = mask_of(sub)
                acc[mask] = acc.get(mask, 0.0) + sign * scale
    return ZPolynomial(n_qubits, tuple(acc.items()))


def encode(n: int, l_p: int | None = None, l_q: int | None = None) -> tuple[ZPolynomial, "DecodingRule", FactorInstance]:
    """Generic pipeline: instance -> cost -> Hamiltonian, plus its decoding rule."""
    inst = FactorInstance.from_n(n, l_p, l_q)
    cost = build_cost(inst)
    h = boolean_to_zpoly(cost, inst.qubit_of, len(inst.variable_layout))
    return h, inst.decoding_rule(), inst


def valid_splits(n: int) -> list[tuple[int, int]]:
    """All ``(l_p, l_q)`` with both >= 2 and ``l_p + l_q`` in ``{l_n, l_n + 1}``."""
    ln = n.bit_length()
    return [(a, s - a) for s in (ln, ln + 1) for a in range(2, s - 1)]


# ------------------------------------------------------------------ decoding


@dataclass(frozen=True)
class DecodingRule:
    """Which qubit supplies each inner bit of the two factors.

    ``p_bits[i] = (qubit, complement)`` gives bit ``i + 1`` of ``p``; the
    terminal bits are always 1.  For the catalog rules ``p_bits`` walks
    qubits 0, 1, ... so the factor is the basis label reversed and padded
    with a 1 at each end, and ``q`` reads the same qubits complemented.
    """

    n_qubits: int
    l_p: int
    l_q: int
    p_bits: tuple[tuple[int, bool], ...]
    q_bits: tuple[tuple[int, bool], ...]

    def __post_init__(self):
        for bits, length in ((self.p_bits, self.l_p), (self.q_bits, self.l_q)):
            if len(bits) != length - 2:
                raise ValueError("one qubit per inner factor bit required")
            if any(not 0 <= k < self.n_qubits for k, _ in bits):
                raise ValueError("decoding qubit out of range")

    @classmethod
    def reverse_and_pad(cls, n_qubits: int, complement_q: bool = True) -> "DecodingRule":
        bits = tuple((k, False) for k in range(n_qubits))
        qbits = tuple((k, complement_q) for k in range(n_qubits))
        return cls(n_qubits, n_qubits + 2, n_qubits + 2, bits, qbits)

    def _read(self, state: int, bits, length: int) -> int:
        value = 1 | (1 << (length - 1))
        for i, (k, comp) in enumerate(bits, start=1):
            b = (state >> (self.n_qubits - 1 - k)) & 1
            value |= (b ^ comp) << i
        return value

    def decode(self, state: int) -> tuple[int, int]:
        if not 0 <= state < (1 << self.n_qubits):
            raise ValueError("basis index out of range")
        return self._read(state, self.p_bits, self.l_p), self._read(state, self.q_bits, self.l_q)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "l_p": self.l_p,
            "l_q": self.l_q,
            "p_bits": [[k, c] for k, c in self.p_bits],
            "q_bits": [[k, c] for k, c in self.q_bits],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "DecodingRule":
        return cls(
            int(data["n_qubits"]),
            int(data["l_p"]),
            int(data["l_q"]),
            tuple((int(k), bool(c)) for k, c in data["p_bits"]),
            tuple((int(k), bool(c)) for k, c in data["q_bits"]),
        )


def decode_factors(state: int, rule: DecodingRule) -> tuple[int, int]:
    return rule.decode(state)


# ------------------------------------------------------------------ oracles


def brute_force_ground_states(h: ZPolynomial, tol: float = GROUND_TOL) -> tuple[float, frozenset[int]]:
    if h.n_qubits > MAX_ENUM_QUBITS:
        raise ValueError(f"enumeration limited to {MAX_ENUM_QUBITS} qubits")
    diag = h.diagonal
    e0 = float(diag.min())
    states = frozenset(int(i) for i in np.flatnonzero(np.abs(diag - e0) <= tol))
    return e0, states


def verify_truncation(full: ZPolynomial, truncated: ZPolynomial) -> bool:
    if full.n_qubits != truncated.n_qubits:
        raise ValueError("qubit counts differ")
    return brute_force_ground_states(full)[1] == brute_force_ground_states(truncated)[1]


# ------------------------------------------------------------------ catalog


@dataclass(frozen=True)
class CatalogEntry:
    n: int
    variant: str
    hamiltonian: ZPolynomial
    rule: DecodingRule
    factors: tuple[int, int]
    note: str = ""
    ground_energy: float | None = None

    @property
    def key(self) -> str:
        return f"{self.n}:{self.variant}"


def load_catalog(path=None) -> dict[tuple[int, str], CatalogEntry]:
    """Read a catalog file (default: the packaged one), validating its schema."""
    from .io import load_json_validated

    if path is None:
        text = resources.files("falqon_factor").joinpath("data/catalog.json").read_text()
        data = json.loads(text)
        from .io import validate

        validate(data, "catalog")
    else:
        data = load_json_validated(path, "catalog")
    out = {}
    for e in data["entries"]:
        h = ZPolynomial(int(e["n_qubits"]), tuple((int(t["mask"]), float(t["coeff"])) for t in e["terms"]))
        entry = CatalogEntry(
            n=int(e["n"]),
            variant=e["variant"],
            hamiltonian=h,
            rule=DecodingRule.from_json(e["decoding"]),
            factors=tuple(sorted(e["factors"])),
            note=e.get("note", ""),
            ground_energy=e.get("ground_energy"),
        )
        out[(entry.n, entry.variant)] = entry
    return out


def catalog_hamiltonian(n: int, variant: str = "full", catalog=None) -> tuple[ZPolynomial, DecodingRule]:
    catalog = load_catalog() if catalog is None else catalog
    if variant not in ("full", "truncated"):
        raise UnsupportedVariant(f"unknown variant {variant!r}")
    if not any(k[0] == n for k in catalog):
        raise CatalogError(f"{n} is not in the catalog")
    if (n, variant) not in catalog:
        raise UnsupportedVariant(f"{n} has no {variant} Hamiltonian")
    e = catalog[(n, variant)]
    return e.hamiltonian, e.rule


def solution_states(h: ZPolynomial, rule: DecodingRule, n: int) -> frozenset[int]:
    """Ground states of ``h`` whose decoding multiplies to ``n``."""
    _, ground = brute_force_ground_states(h)
    return frozenset(s for s in ground if _product(rule.decode(s)) == n)


def _product(pq: tuple[int, int]) -> int:
    return pq[0] * pq[1]


def describe_states(states: Iterable[int], rule: DecodingRule) -> list[str]:
    return [f"|{basis_label(s, rule.n_qubits)}> -> {rule.decode(s)}" for s in sorted(states)]
