"""
Fock-space engine: lattice charges, truncated bases, oscillators and normal-ordered exponentials
"""
import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from config import CHECKED_FOCK_STATES_LIMIT, setup_logging
from core.coeffs import (
    ONE, ZERO, PLAIN_KEY, QQ_U, ExpVector, PhasedScalar, combine_keys, q, qnum, qpow,
    qscalar, render, to_fraction,
)
from core.errors import IndexRangeError, SingularMatrixError
from core.utils import phased_json

logger = setup_logging()


# ======================================================
# 📐 CARTAN DATA
# ======================================================

@dataclass(frozen=True)
class CartanData:
    """Enlarged Cartan matrix a_ij = (alpha_i, alpha_j), i, j = 1..2N, and its exact inverse"""
    N: int
    a: tuple
    a_inv: tuple

    @property
    def rank(self) -> int:
        return 2 * self.N


def _simple_root(N: int, i: int) -> dict:
    # alpha_l = eps_l - eps_(l+1), alpha_2N = sum of all eps_k
    if i < 2 * N:
        return {i: 1, i + 1: -1}
    return {k: 1 for k in range(1, 2 * N + 1)}


def _root_form(x: dict, y: dict) -> int:
    return sum(c * y.get(k, 0) * (1 if k % 2 == 1 else -1) for k, c in x.items())


@lru_cache(maxsize=None)
def cartan_data(N: int) -> CartanData:
    if N < 1:
        raise ValueError("N must be positive")
    n = 2 * N
    roots = [_simple_root(N, i) for i in range(1, n + 1)]
    a = tuple(tuple(_root_form(x, y) for y in roots) for x in roots)
    matrix = DomainMatrix([[QQ(v) for v in row] for row in a], (n, n), QQ)
    try:
        inverse = matrix.inv()
    except DMNonInvertibleMatrixError as e:
        raise SingularMatrixError(f"Cartan matrix of rank {N} is singular: {e}")
    a_inv = tuple(tuple(to_fraction(v) for v in row) for row in inverse.to_list())
    return CartanData(N, a, a_inv)


# ======================================================
# 🎻 OSCILLATORS
# ======================================================
#
# Colors 0..2N-1 are a^1..a^2N, colors 2N..3N-1 are c^1..c^N.

def color_count(N: int) -> int:
    return 3 * N


def a_color(j: int) -> int:
    return j - 1


def c_color(N: int, l: int) -> int:
    return 2 * N + l - 1


def color_sign(N: int, color: int) -> int:
    """(-1)^(j+1) for a^j, +1 for every c^l"""
    if color >= 2 * N:
        return 1
    return 1 if color % 2 == 0 else -1


def color_name(N: int, color: int) -> str:
    if color < 2 * N:
        return f"a{color + 1}"
    return f"c{color - 2 * N + 1}"


@dataclass(frozen=True)
class OscillatorLabel:
    family: str
    index: int
    mode: int

    def color(self, N: int) -> int:
        if self.family == 'a' and 1 <= self.index <= 2 * N:
            return a_color(self.index)
        if self.family == 'c' and 1 <= self.index <= N:
            return c_color(N, self.index)
        raise IndexRangeError(f"no oscillator {self.family}^{self.index} at rank {N}")


@lru_cache(maxsize=None)
def oscillator_norm(N: int, color: int, n: int):
    """[b_n, b_-n] = sign(b) [n]^2 / n"""
    return qscalar(color_sign(N, color)) * qnum(n) ** 2 / n


def oscillator_commutator_table(N: int, n: int) -> dict:
    if n == 0:
        raise ValueError("zero modes commute with every oscillator")
    return {color_name(N, color): oscillator_norm(N, color, n) for color in range(color_count(N))}


# ======================================================
# 🧷 COMPOSITE OSCILLATORS A, A*
# ======================================================

@dataclass(frozen=True)
class ComboTable:
    """Expansions of A^i_n, A*^j_n and their charges over the elementary oscillators"""
    cartan: CartanData

    @property
    def N(self) -> int:
        return self.cartan.N

    def _check(self, i: int):
        if not 1 <= i <= 2 * self.N:
            raise IndexRangeError(f"composite index {i} outside 1..{2 * self.N}")

    def _vector(self, entries: dict, zero=Fraction(0)) -> tuple:
        return tuple(entries.get(color, zero) for color in range(color_count(self.N)))

    @lru_cache(maxsize=None)
    def A_zero(self, i: int) -> tuple:
        self._check(i)
        if i < 2 * self.N:
            sign = Fraction(1 if i % 2 == 1 else -1)
            return self._vector({a_color(i): sign, a_color(i + 1): sign})
        return self._vector({a_color(l): Fraction(1 if l % 2 == 1 else -1) for l in range(1, 2 * self.N + 1)})

    @lru_cache(maxsize=None)
    def A(self, i: int, n: int) -> tuple:
        base = tuple(qscalar(x) for x in self.A_zero(i))
        if i < 2 * self.N or n == 0:
            return base
        factor = (q ** n + q ** -n) / 2
        return tuple(x * factor for x in base)

    @lru_cache(maxsize=None)
    def Q_A(self, i: int) -> tuple:
        self._check(i)
        if i < 2 * self.N:
            return self._vector({a_color(i): Fraction(1), a_color(i + 1): Fraction(-1)})
        return self._vector({a_color(l): Fraction(1) for l in range(1, 2 * self.N + 1)})

    def _inverse_combination(self, j: int, vectors) -> tuple:
        """sum_l a_inv[j][l] * vectors[l], kept in the vectors' own number type"""
        row = self.cartan.a_inv[j - 1]
        exact = isinstance(vectors[0][0], Fraction)
        total = [Fraction(0) if exact else ZERO] * color_count(self.N)
        for l, vector in enumerate(vectors, start=1):
            weight = row[l - 1]
            if not weight:
                continue
            weight = weight if exact else qscalar(weight)
            for color, value in enumerate(vector):
                total[color] = total[color] + value * weight
        return tuple(total)

    @lru_cache(maxsize=None)
    def A_star_zero(self, j: int) -> tuple:
        self._check(j)
        return self._inverse_combination(j, [self.A_zero(l) for l in range(1, 2 * self.N + 1)])

    @lru_cache(maxsize=None)
    def Q_A_star(self, j: int) -> tuple:
        self._check(j)
        return self._inverse_combination(j, [self.Q_A(l) for l in range(1, 2 * self.N + 1)])

    @lru_cache(maxsize=None)
    def A_star(self, j: int, n: int) -> tuple:
        self._check(j)
        if n == 0:
            return tuple(qscalar(x) for x in self.A_star_zero(j))
        rank = 2 * self.N
        if j < rank:
            # the (q^n + q^-n)/2 of A^2N cancels against its prefactor
            vectors = [self.A(l, n) for l in range(1, rank)]
            vectors.append(tuple(qscalar(x) for x in self.A_zero(rank)))
            return tuple(qscalar(x) for x in self._inverse_combination(j, vectors))
        combined = self._inverse_combination(j, [self.A(l, n) for l in range(1, rank + 1)])
        return tuple(x * rank for x in combined)

    def pairing(self, i: int, j: int, n: int):
        """[A^i_n, A*^j_-n] from the elementary commutators"""
        left, right = self.A(i, n), self.A_star(j, -n)
        return sum((left[b] * right[b] * oscillator_norm(self.N, b, n)
                    for b in range(color_count(self.N)) if left[b] and right[b]), ZERO)


@lru_cache(maxsize=None)
def combo_coefficients(N: int) -> ComboTable:
    return ComboTable(cartan_data(N))


# ======================================================
# 🌐 LATTICE, STATES AND BASES
# ======================================================

def _fractions(values) -> tuple:
    return tuple(to_fraction(v) for v in values)


def dot(x, y) -> Fraction:
    return sum((a * b for a, b in zip(x, y)), Fraction(0))


@dataclass(frozen=True, order=True)
class LatticePoint:
    """Zero-mode charges: a_charges for Q_(a^j), c_charges for Q_(c^l)"""
    a_charges: tuple
    c_charges: tuple

    @classmethod
    def of(cls, a_charges, c_charges) -> 'LatticePoint':
        return cls(_fractions(a_charges), _fractions(c_charges))

    @classmethod
    def origin(cls, N: int) -> 'LatticePoint':
        return cls.of([0] * 2 * N, [0] * N)

    @property
    def N(self) -> int:
        return len(self.c_charges)

    @property
    def charges(self) -> tuple:
        return self.a_charges + self.c_charges

    def shifted(self, delta) -> 'LatticePoint':
        delta = tuple(delta) + (Fraction(0),) * (len(self.charges) - len(delta))
        values = [x + d for x, d in zip(self.charges, delta)]
        return LatticePoint(tuple(values[:2 * self.N]), tuple(values[2 * self.N:]))

    def describe(self) -> str:
        a = ','.join(str(x) for x in self.a_charges)
        c = ','.join(str(x) for x in self.c_charges)
        return f"({a};{c})"


def occupation_degree(occupation: tuple) -> int:
    return sum(mode * mult for (_, mode), mult in occupation)


def merge_occupations(left: tuple, right: tuple) -> tuple:
    if not right:
        return left
    if not left:
        return right
    merged = dict(left)
    for slot, mult in right:
        merged[slot] = merged.get(slot, 0) + mult
    return tuple(sorted(merged.items()))


@dataclass(frozen=True, order=True)
class FockState:
    """
    Monomial state prod b_(-m)^mult |lattice>.

    occupation is a sorted tuple of ((color, m), mult) with m > 0.
    """
    lattice: LatticePoint
    degree: int
    occupation: tuple

    @classmethod
    def of(cls, lattice: LatticePoint, occupation=()) -> 'FockState':
        occupation = tuple(sorted((slot, mult) for slot, mult in occupation if mult))
        return cls(lattice, occupation_degree(occupation), occupation)

    def multiplicity(self, color: int, mode: int) -> int:
        for slot, mult in self.occupation:
            if slot == (color, mode):
                return mult
        return 0

    def describe(self) -> str:
        N = self.lattice.N
        parts = [f"{color_name(N, c)}_-{m}" + (f"^{mult}" if mult > 1 else '')
                 for (c, m), mult in self.occupation]
        return ' '.join(parts + [f"|{self.lattice.describe()}>"])


@lru_cache(maxsize=None)
def _multisets(degree: int, slots: tuple) -> tuple:
    """All occupations of total degree over the given (color, mode) slots, in canonical order"""
    if degree == 0:
        return ((),)
    if not slots:
        return ()
    (color, mode), rest = slots[0], slots[1:]
    found = []
    for mult in range(degree // mode + 1):
        for tail in _multisets(degree - mult * mode, rest):
            found.append(((((color, mode), mult),) + tail) if mult else tail)
    return tuple(sorted(found))


def colored_multisets(degree: int, colors: int) -> tuple:
    slots = tuple((color, mode) for color in range(colors) for mode in range(1, degree + 1))
    return _multisets(degree, slots)


@dataclass(frozen=True)
class FockBasis:
    states: tuple
    lattice_window: tuple
    max_degree: int
    index: dict = field(compare=False, repr=False)

    def __len__(self):
        return len(self.states)

    def __contains__(self, state):
        return state in self.index

    def position(self, state: FockState) -> int:
        return self.index[state]

    def up_to_degree(self, degree: int) -> list:
        return [s for s in self.states if s.degree <= degree]

    def at_lattice(self, lattice: LatticePoint) -> list:
        return [s for s in self.states if s.lattice == lattice]

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for state in self.states:
            digest.update(state.describe().encode('utf-8'))
            digest.update(b'\n')
        return digest.hexdigest()


def enumerate_basis(lattice_window, D: int) -> FockBasis:
    """All states with lattice in the window and oscillator degree <= D"""
    if D < 0:
        raise ValueError("max degree must be nonnegative")
    window = tuple(sorted(set(lattice_window)))
    states = []
    for lattice in window:
        colors = color_count(lattice.N)
        for degree in range(D + 1):
            states.extend(FockState(lattice, degree, occ) for occ in colored_multisets(degree, colors))
    index = {state: i for i, state in enumerate(states)}
    logger.debug(f"Enumerated {len(states)} Fock states on {len(window)} lattice points up to degree {D}")
    return FockBasis(tuple(states), window, D, index)


# ======================================================
# 🧮 SPARSE VECTORS
# ======================================================
#
# A vector is a dict {(FockState, phase_key): QScalar}.

def basis_vector(state: FockState, coeff=ONE) -> dict:
    return {(state, PLAIN_KEY): qscalar(coeff)}


def accumulate(acc: dict, vector: dict, coeff=ONE, key=PLAIN_KEY):
    """acc += coeff * e(key) * vector, in place"""
    for (state, k), value in vector.items():
        if key == PLAIN_KEY:
            new_key, factor = k, ONE
        else:
            new_key, factor = combine_keys(k, key)
        entry = (state, new_key)
        acc[entry] = acc.get(entry, ZERO) + value * coeff * factor


def prune(vector: dict) -> dict:
    return {k: v for k, v in vector.items() if v}


def vector_difference(left: dict, right: dict) -> dict:
    out = dict(left)
    accumulate(out, right, -ONE)
    return prune(out)


def vector_by_state(vector: dict) -> dict:
    """Groups phase keys: {FockState: PhasedScalar}"""
    grouped = {}
    for (state, key), value in vector.items():
        if value:
            grouped.setdefault(state, {})[key] = value
    return {state: PhasedScalar(terms) for state, terms in grouped.items()}


# ======================================================
# 🌊 LINEAR FIELDS AND NORMAL-ORDERED EXPONENTIALS
# ======================================================

@dataclass(frozen=True, eq=False)
class LinearField:
    """
    charge.Q + (zmode.b_0) ln z + (qmode.b_0) ln q + sum_(n != 0) oscillators(n).b_n z^-n

    Vectors run over the 3N colors; oscillators(n) returns QScalars.
    """
    N: int
    charge: tuple
    zmode: tuple
    qmode: tuple
    oscillators: Callable
    label: str = ''
    _cache: dict = field(default_factory=dict, repr=False)

    def osc(self, n: int) -> tuple:
        if n not in self._cache:
            self._cache[n] = tuple(self.oscillators(n))
        return self._cache[n]

    def __add__(self, other: 'LinearField') -> 'LinearField':
        return LinearField(
            self.N,
            tuple(x + y for x, y in zip(self.charge, other.charge)),
            tuple(x + y for x, y in zip(self.zmode, other.zmode)),
            tuple(x + y for x, y in zip(self.qmode, other.qmode)),
            lambda n: tuple(x + y for x, y in zip(self.osc(n), other.osc(n))),
            f"{self.label}+{other.label}",
        )

    def scaled(self, factor) -> 'LinearField':
        factor = to_fraction(factor)
        coeff = qscalar(factor)
        return LinearField(
            self.N,
            tuple(x * factor for x in self.charge),
            tuple(x * factor for x in self.zmode),
            tuple(x * factor for x in self.qmode),
            lambda n: tuple(x * coeff for x in self.osc(n)),
            f"{factor}*{self.label}" if factor != 1 else self.label,
        )

    def __neg__(self) -> 'LinearField':
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def at(self, t) -> 'LinearField':
        """The same field at argument q^t z"""
        t = to_fraction(t)
        if not t:
            return self
        return LinearField(
            self.N,
            self.charge,
            self.zmode,
            tuple(r + t * p for r, p in zip(self.qmode, self.zmode)),
            lambda n: tuple(x * qpow(-t * n) for x in self.osc(n)),
            f"{self.label}(q^{t}z)",
        )


def zero_field(N: int) -> LinearField:
    zeros = (Fraction(0),) * color_count(N)
    return LinearField(N, zeros, zeros, zeros, lambda n: (ZERO,) * color_count(N), '0')


def _boson_field(N, charge, zmode, coefficients, kappa, scale, label) -> LinearField:
    """charge.Q + zmode.b_0 ln z - scale * sum coefficients(n) q^(kappa|n|) z^-n / [n]"""
    kappa = to_fraction(kappa)
    scale = qscalar(scale)
    zeros = (Fraction(0),) * color_count(N)

    def oscillators(n):
        factor = -scale * qpow(kappa * abs(n)) / qnum(n)
        return tuple(x * factor for x in coefficients(n))

    return LinearField(N, tuple(charge), tuple(zmode), zeros, oscillators, label)


def field_H(combo: ComboTable, j: int, kappa=0) -> LinearField:
    return _boson_field(combo.N, combo.Q_A(j), combo.A_zero(j), lambda n: combo.A(j, n),
                        kappa, 1, f"H{j}[{kappa}]")


def field_H_star(combo: ComboTable, j: int, kappa=0) -> LinearField:
    if not 1 <= j < 2 * combo.N:
        raise IndexRangeError(f"H*^{j} is defined for j = 1..{2 * combo.N - 1}")
    return _boson_field(combo.N, combo.Q_A_star(j), combo.A_star_zero(j), lambda n: combo.A_star(j, n),
                        kappa, 1, f"H*{j}[{kappa}]")


def field_B(combo: ComboTable, which: str, kappa=0) -> LinearField:
    """B_2N and B_1 share charge and zero mode; B_1 carries -(N-1)/N times the oscillators"""
    rank = 2 * combo.N
    if which == 'B2N':
        scale = 1
    elif which == 'B1':
        scale = -Fraction(combo.N - 1, combo.N)
    else:
        raise IndexRangeError(f"unknown B field {which}")
    return _boson_field(combo.N, combo.Q_A_star(rank), combo.A_star_zero(rank), lambda n: combo.A_star(rank, n),
                        kappa, scale, f"{which}[{kappa}]")


def field_c(combo: ComboTable, l: int) -> LinearField:
    N = combo.N
    if not 1 <= l <= N:
        raise IndexRangeError(f"c^{l} is defined for l = 1..{N}")
    unit = tuple(Fraction(1 if color == c_color(N, l) else 0) for color in range(color_count(N)))
    return _boson_field(N, unit, unit, lambda n: tuple(qscalar(x) for x in unit), 0, 1, f"c{l}")


def field_H_plus(combo: ComboTable, j: int) -> LinearField:
    """(q - q^-1) sum_(n>0) A^j_n z^-n + A^j_0 ln q"""
    N = combo.N
    zeros = (Fraction(0),) * color_count(N)

    def oscillators(n):
        if n < 0:
            return (ZERO,) * color_count(N)
        return tuple(x * (q - q ** -1) for x in combo.A(j, n))

    return LinearField(N, zeros, zeros, combo.A_zero(j), oscillators, f"H{j}+")


def field_H_minus(combo: ComboTable, j: int) -> LinearField:
    """-(q - q^-1) sum_(n>0) A^j_-n z^n - A^j_0 ln q"""
    N = combo.N
    zeros = (Fraction(0),) * color_count(N)

    def oscillators(n):
        if n > 0:
            return (ZERO,) * color_count(N)
        return tuple(-x * (q - q ** -1) for x in combo.A(j, n))

    return LinearField(N, zeros, zeros, tuple(-x for x in combo.A_zero(j)), oscillators, f"H{j}-")


@dataclass(frozen=True)
class ExpTerm:
    """coeff * z^z_shift * :exp(field): * exp(i pi cocycle.b_0)"""
    field: LinearField
    coeff: object = ONE
    z_shift: Fraction = Fraction(0)
    cocycle: tuple = ()


@dataclass(frozen=True)
class ExpField:
    """
    Finite sum of normal-ordered exponentials with a common charge.

    Mode n is the coefficient of z^(-n - mode_offset).
    """
    terms: tuple
    parity: int = 0
    mode_offset: Fraction = Fraction(0)
    label: str = ''

    @property
    def charge(self) -> tuple:
        return self.terms[0].field.charge

    def exponent(self, n) -> Fraction:
        return -to_fraction(n) - self.mode_offset

    def mode(self, n) -> 'ExpMode':
        return ExpMode(self, self.exponent(n), f"{self.label}_{n}")

    def coefficient(self, exponent) -> 'ExpMode':
        exponent = to_fraction(exponent)
        return ExpMode(self, exponent, f"{self.label}[z^{exponent}]")

    def base_exponent(self, lattice: LatticePoint) -> Fraction:
        """z-power of the vacuum-to-vacuum part of the first term on this lattice point"""
        term = self.terms[0]
        return term.z_shift + dot(term.field.zmode, lattice.charges)

    def with_cocycle(self, cocycle: tuple) -> 'ExpField':
        terms = tuple(ExpTerm(t.field, t.coeff, t.z_shift, cocycle) for t in self.terms)
        return ExpField(terms, self.parity, self.mode_offset, self.label)


def exp_field(linear: LinearField, coeff=ONE, z_shift=0, cocycle=(), parity=0, mode_offset=0, label=None) -> ExpField:
    term = ExpTerm(linear, qscalar(coeff), to_fraction(z_shift), tuple(cocycle))
    return ExpField((term,), parity, to_fraction(mode_offset), label or linear.label)


def _creation_terms(fld: LinearField, degree: int) -> tuple:
    """(occupation, prod g^mult / mult!) for the creation exponential at the given degree"""
    key = ('create', degree)
    if key in fld._cache:
        return fld._cache[key]
    slots = tuple(sorted((color, m) for m in range(1, degree + 1)
                         for color, g in enumerate(fld.osc(-m)) if g))
    terms = []
    for occupation in _multisets(degree, slots):
        coeff = ONE
        for (color, m), mult in occupation:
            coeff = coeff * fld.osc(-m)[color] ** mult / math.factorial(mult)
        if coeff:
            terms.append((occupation, coeff))
    fld._cache[key] = tuple(terms)
    return fld._cache[key]


def _annihilation_terms(fld: LinearField, occupation: tuple) -> list:
    """(remaining occupation, removed degree, coefficient) for the annihilation exponential"""
    results = [((), 0, ONE)]
    N = fld.N
    for (color, m), mult in occupation:
        gamma = fld.osc(m)[color] * oscillator_norm(N, color, m)
        extended = []
        for remaining, removed, coeff in results:
            for r in range(mult + 1 if gamma else 1):
                kept = mult - r
                value = coeff * math.comb(mult, r) * gamma ** r if r else coeff
                rest = remaining + ((((color, m), kept),) if kept else ())
                extended.append((rest, removed + r * m, value))
        results = extended
    return results


def _exp_term_on_state(term: ExpTerm, state: FockState, exponent: Fraction, out: dict):
    fld = term.field
    charges = state.lattice.charges
    delta = exponent - term.z_shift - dot(fld.zmode, charges)
    if delta.denominator != 1:
        return
    delta = int(delta)
    cocycle = tuple(term.cocycle) + (Fraction(0),) * (len(charges) - len(term.cocycle))
    prefactor = PhasedScalar.monomial(term.coeff, q_exponent=dot(fld.qmode, charges),
                                      phase=dot(cocycle, charges))
    target_lattice = state.lattice.shifted(fld.charge)
    for remaining, removed, ann in _annihilation_terms(fld, state.occupation):
        created = delta + removed
        if created < 0:
            continue
        for occupation, cre in _creation_terms(fld, created):
            merged = merge_occupations(remaining, occupation)
            target = FockState(target_lattice, occupation_degree(merged), merged)
            value = ann * cre
            for key, pre in prefactor.terms.items():
                entry = (target, key)
                out[entry] = out.get(entry, ZERO) + pre * value


def apply_field_coefficient(spec: ExpField, vector: dict, exponent) -> dict:
    """Exact action of the z^exponent coefficient of a normal-ordered field on a vector"""
    exponent = to_fraction(exponent)
    out = {}
    for (state, key), value in vector.items():
        if not value:
            continue
        image = {}
        for term in spec.terms:
            _exp_term_on_state(term, state, exponent, image)
        accumulate(out, image, value, key)
    return prune(out)


# ======================================================
# ⚙️ OPERATOR ALGEBRA
# ======================================================

class Operator:
    """Lazily applied linear operator; images of basis states are cached"""
    parity = 0
    label = ''

    def __init__(self):
        self._images = {}

    def _apply_state(self, state: FockState) -> dict:
        raise NotImplementedError

    def apply_state(self, state: FockState) -> dict:
        image = self._images.get(state)
        if image is None:
            image = prune(self._apply_state(state))
            self._images[state] = image
        return image

    def apply(self, vector: dict) -> dict:
        out = {}
        for (state, key), value in vector.items():
            if value:
                accumulate(out, self.apply_state(state), value, key)
        return prune(out)

    def __add__(self, other):
        return LinComb([(ONE, self), (ONE, other)])

    def __sub__(self, other):
        return LinComb([(ONE, self), (-ONE, other)])

    def __neg__(self):
        return LinComb([(-ONE, self)])

    def __mul__(self, other):
        if isinstance(other, Operator):
            return Product([self, other])
        return LinComb([(other, self)])

    def __rmul__(self, scalar):
        return LinComb([(scalar, self)])

    def __repr__(self):
        return f"{type(self).__name__}({self.label})"


class ExpMode(Operator):
    """One z-coefficient of an ExpField"""

    def __init__(self, spec: ExpField, exponent: Fraction, label: str = ''):
        super().__init__()
        self.spec = spec
        self.exponent = to_fraction(exponent)
        self.parity = spec.parity
        self.label = label or spec.label

    def _apply_state(self, state):
        out = {}
        for term in self.spec.terms:
            _exp_term_on_state(term, state, self.exponent, out)
        return out


class OscillatorMode(Operator):
    """sum_b coeffs[b] * b_n; zero modes act by their lattice charge"""

    def __init__(self, N: int, coeffs: tuple, n: int, label: str = ''):
        super().__init__()
        self.N = N
        self.coeffs = tuple(qscalar(c) for c in coeffs)
        self.n = n
        self.label = label or f"osc_{n}"

    def _apply_state(self, state):
        out = {}
        n = self.n
        if n == 0:
            value = sum((c * qscalar(x) for c, x in zip(self.coeffs, state.lattice.charges) if c), ZERO)
            return {(state, PLAIN_KEY): value}
        for color, c in enumerate(self.coeffs):
            if not c:
                continue
            if n < 0:
                occ = merge_occupations(state.occupation, (((color, -n), 1),))
                target = FockState(state.lattice, state.degree - n, occ)
                out[(target, PLAIN_KEY)] = out.get((target, PLAIN_KEY), ZERO) + c
                continue
            mult = state.multiplicity(color, n)
            if not mult:
                continue
            occ = tuple((slot, m - 1 if slot == (color, n) else m) for slot, m in state.occupation)
            target = FockState.of(state.lattice, occ)
            value = c * mult * oscillator_norm(self.N, color, n)
            out[(target, PLAIN_KEY)] = out.get((target, PLAIN_KEY), ZERO) + value
        return out


def oscillator_mode(label: OscillatorLabel, N: int) -> OscillatorMode:
    coeffs = [ZERO] * color_count(N)
    coeffs[label.color(N)] = ONE
    return OscillatorMode(N, tuple(coeffs), label.mode, f"{label.family}{label.index}_{label.mode}")


class Diagonal(Operator):
    """Acts on each basis state by a scalar: func(state) returns a QScalar or PhasedScalar"""

    def __init__(self, func: Callable, label: str = ''):
        super().__init__()
        self.func = func
        self.label = label

    def _apply_state(self, state):
        value = self.func(state)
        if not isinstance(value, PhasedScalar):
            return {(state, PLAIN_KEY): qscalar(value)}
        return {(state, key): v for key, v in value.terms.items()}


def identity_operator() -> Diagonal:
    return Diagonal(lambda state: ONE, '1')


class LinComb(Operator):
    """sum_k c_k O_k with QScalar or PhasedScalar c_k"""

    def __init__(self, terms: list, label: str = ''):
        super().__init__()
        self.terms = [(c, op) for c, op in terms]
        self.parity = self.terms[0][1].parity if self.terms else 0
        self.label = label or ' + '.join(op.label for _, op in self.terms)

    def _apply_state(self, state):
        out = {}
        for coeff, op in self.terms:
            image = op.apply_state(state)
            if isinstance(coeff, PhasedScalar):
                for key, value in coeff.terms.items():
                    accumulate(out, image, value, key)
            else:
                accumulate(out, image, qscalar(coeff))
        return out


class Product(Operator):
    """factors[0] factors[1] ... factors[-1]; the last factor acts first"""

    def __init__(self, factors: list, label: str = ''):
        super().__init__()
        self.factors = list(factors)
        self.parity = sum(f.parity for f in self.factors) % 2
        self.label = label or ' '.join(f.label for f in self.factors)

    def _apply_state(self, state):
        vector = self.factors[-1].apply_state(state)
        for factor in reversed(self.factors[:-1]):
            if not vector:
                break
            vector = factor.apply(vector)
        return vector


def bracket(a: Operator, b: Operator, x=ONE) -> LinComb:
    """Graded q-bracket [a, b]_x = ab - (-1)^([a][b]) x ba"""
    sign = -1 if a.parity * b.parity else 1
    if isinstance(x, PhasedScalar):
        coeff = PhasedScalar.monomial(-sign) * x
    else:
        coeff = qscalar(x) * -sign
    return LinComb([(ONE, Product([a, b])), (coeff, Product([b, a]))], label=f"[{a.label}, {b.label}]")


# ======================================================
# ✅ GUARDED COMPARISON
# ======================================================

def capped_states(states: list, limit: int = CHECKED_FOCK_STATES_LIMIT) -> tuple:
    """Returns (states[:limit], capped); capped is (limit, total) when states were dropped, else None"""
    if len(states) <= limit:
        return states, None
    logger.info(f"✂️ Capping checked states at {limit} of {len(states)}")
    return states[:limit], (limit, len(states))


def guarded_states(basis: FockBasis, reach: int, limit: int = CHECKED_FOCK_STATES_LIMIT) -> tuple:
    """
    Source states of degree <= D - reach, capped at `limit`.

    Returns (states, guard, capped) with capped as in capped_states.
    """
    guard = basis.max_degree - reach
    states, capped = capped_states(basis.up_to_degree(guard) if guard >= 0 else [], limit)
    return states, guard, capped


def compare_on_states(lhs: Operator, rhs: Operator, states, report, label: str = ''):
    """Adds lhs - rhs residual entries on each state to a RelationReport"""
    for state in states:
        residual = vector_difference(lhs.apply_state(state), rhs.apply_state(state))
        report.checked_dim += 1
        for (target, key), value in residual.items():
            report.record_failure(f"{label} <{target.describe()}|..|{state.describe()}> "
                                  f"phase {key}: {render(value)}")
    return report


# ======================================================
# 🧱 MATERIALIZED MATRICES
# ======================================================

@dataclass
class OpMatrix:
    """Sparse matrix of an operator between truncated bases; entries are PhasedScalars"""
    source: FockBasis
    target: FockBasis
    entries: dict
    degree_shifts: frozenset = frozenset()
    exp_offset: ExpVector = field(default_factory=ExpVector)
    dropped: int = 0

    @property
    def degree_shift(self):
        return next(iter(self.degree_shifts)) if len(self.degree_shifts) == 1 else None

    def nonzero_count(self) -> int:
        return sum(1 for v in self.entries.values() if not v.is_zero())

    def entry(self, row: int, col: int) -> PhasedScalar:
        return self.entries.get((row, col), PhasedScalar.zero())

    def to_domain_matrix(self) -> DomainMatrix:
        """Plain QQ(u) matrix; raises ResidualPhaseError if an entry carries a phase"""
        rows = {}
        for (r, c), value in self.entries.items():
            plain = value.as_qscalar()
            if plain:
                rows.setdefault(r, {})[c] = plain
        return DomainMatrix(rows, (len(self.target), len(self.source)), QQ_U)

    def as_json(self) -> dict:
        return {
            'source': [s.describe() for s in self.source.states],
            'target': [s.describe() for s in self.target.states],
            'entries': [[r, c, phased_json(v)] for (r, c), v in sorted(self.entries.items())],
            'dropped': self.dropped,
        }


def materialize(op: Operator, source: FockBasis, target: FockBasis = None) -> OpMatrix:
    target = target or source
    entries = {}
    shifts = set()
    offsets = set()
    dropped = 0
    for col, state in enumerate(source.states):
        for image_state, value in vector_by_state(op.apply_state(state)).items():
            if value.is_zero():
                continue
            row = target.index.get(image_state)
            if row is None:
                dropped += 1
                continue
            entries[(row, col)] = value
            shifts.add(image_state.degree - state.degree)
    if isinstance(op, ExpMode):
        offsets = {(op.spec.base_exponent(lattice)) % 1 for lattice in source.lattice_window}
    exp_offset = ExpVector({'z': next(iter(offsets))}) if len(offsets) == 1 else ExpVector()
    if dropped:
        logger.debug(f"{op.label}: {dropped} entries left the target basis")
    return OpMatrix(source, target, entries, frozenset(shifts), exp_offset, dropped)


def exp_vertex_mode(spec: ExpField, n, basis: FockBasis, target: FockBasis = None) -> OpMatrix:
    """Matrix of mode n of a normal-ordered exponential field"""
    return materialize(spec.mode(n), basis, target)


def oscillator_action(label: OscillatorLabel, basis: FockBasis, target: FockBasis = None) -> OpMatrix:
    N = basis.lattice_window[0].N
    return materialize(oscillator_mode(label, N), basis, target)
