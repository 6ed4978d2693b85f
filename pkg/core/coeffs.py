"""
Exact coefficient arithmetic: rational functions in u = q^(1/2), phased scalars and truncated series
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from sympy import QQ, Symbol
from sympy.external.gmpy import GROUND_TYPES
from sympy.polys.fields import FracElement
from sympy.utilities.iterables import partitions

from core.errors import DivisionByZeroError, NonConstantError, NonRationalExponentError, VariableMismatchError

logger = logging.getLogger(__name__)

# QQ arithmetic runs on gmpy2 whenever sympy can import it
if GROUND_TYPES != 'gmpy':
    logger.warning(f"⚠️ sympy ground types are {GROUND_TYPES!r}; install gmpy2 for fast rational arithmetic")

# ======================================================
# 🔢 THE COEFFICIENT FIELD QQ(u), u = q^(1/2)
# ======================================================

U_SYMBOL = Symbol('u')
QQ_U = QQ.frac_field(U_SYMBOL)
K = QQ_U.field
u = K.gens[0]
q = u ** 2

ZERO = K.zero
ONE = K.one

QScalar = FracElement


def to_fraction(value) -> Fraction:
    """Converts ints, Fractions and ground-domain rationals to Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(int(value.numerator), int(value.denominator))


def qscalar(value) -> QScalar:
    """Coerces an int, Fraction or field element into QQ(u)"""
    if isinstance(value, FracElement):
        return value
    value = to_fraction(value)
    return K(QQ(value.numerator, value.denominator))


def upow(n: int) -> QScalar:
    """u**n for any integer n"""
    return u ** n


def qpow(r) -> QScalar:
    """q**r for r with 2r an integer"""
    r = to_fraction(r)
    if (2 * r).denominator != 1:
        raise NonRationalExponentError(f"q^{r} is not a Laurent monomial in u")
    return u ** int(2 * r)


def qnum(n: int) -> QScalar:
    """The q-number [n] = (q^n - q^-n)/(q - q^-1) as a Laurent polynomial"""
    if n == 0:
        return ZERO
    if n < 0:
        return -qnum(-n)
    return sum((u ** (2 * (n - 1 - 2 * k)) for k in range(n)), ZERO)


def is_zero(x: QScalar) -> bool:
    return not x


def qscalar_arith(a: QScalar, b: QScalar, op: str):
    """Field operations on QScalars; 'eq' is decided by a zero test on a - b"""
    a, b = qscalar(a), qscalar(b)
    if op == 'add':
        return a + b
    if op == 'sub':
        return a - b
    if op == 'mul':
        return a * b
    if op == 'div':
        if not b:
            raise DivisionByZeroError("QScalar division by zero")
        return a / b
    if op == 'eq':
        return not (a - b)
    raise ValueError(f"unknown op {op}")


def canonical(x: QScalar) -> tuple:
    """
    Laurent normal form of x.

    Returns (numerator, denominator) as sorted tuples of (u_exponent, Fraction),
    with the common u-power removed and the denominator's lowest coefficient equal to 1.
    Zero is ((), ((0, 1),)).
    """
    x = qscalar(x)
    if not x:
        return (), ((0, Fraction(1)),)
    den_terms = [(m[0], to_fraction(c)) for m, c in x.denom.terms()]
    num_terms = [(m[0], to_fraction(c)) for m, c in x.numer.terms()]
    low, low_coeff = min(den_terms)
    den = tuple(sorted((e - low, c / low_coeff) for e, c in den_terms))
    num = tuple(sorted((e - low, c / low_coeff) for e, c in num_terms))
    return num, den


def as_rational(x: QScalar) -> Fraction:
    """The rational value of a u-independent element"""
    num, den = canonical(x)
    if not num:
        return Fraction(0)
    if den != ((0, Fraction(1)),) or len(num) != 1 or num[0][0] != 0:
        raise NonConstantError(f"{render(x)} depends on q")
    return num[0][1]


def from_canonical(pair: tuple) -> QScalar:
    num, den = pair
    top = sum((qscalar(c) * u ** e for e, c in num), ZERO)
    bottom = sum((qscalar(c) * u ** e for e, c in den), ZERO)
    return top / bottom


def render(x: QScalar) -> str:
    """Canonical string for reports"""
    num, den = canonical(x)
    if not num:
        return '0'

    def poly(terms):
        parts = []
        for e, c in terms:
            parts.append(f"{c}" if e == 0 else f"{c}*u^{e}")
        return ' + '.join(parts)

    if den == ((0, Fraction(1)),):
        return poly(num)
    return f"({poly(num)})/({poly(den)})"


def specialize_q_one(x):
    """Substitutes u = 1 (so q = 1) in an element of QQ(u) or of a multivariate extension"""
    gen = x.field.gens[0]
    numer = x.numer.evaluate(gen.to_poly(), 1) if x.field.ngens > 1 else x.numer(1)
    denom = x.denom.evaluate(gen.to_poly(), 1) if x.field.ngens > 1 else x.denom(1)
    if not denom:
        raise DivisionByZeroError("q = 1 is a pole")
    if x.field.ngens == 1:
        return to_fraction(numer) / to_fraction(denom)
    return numer.ring.to_field().new(numer, denom)


# ======================================================
# 🌀 PHASED SCALARS: q^r e^(i pi theta) QScalar
# ======================================================

def _split_u_exponent(r: Fraction) -> tuple:
    """q^r = u^(2r) = u^n * u^f with n integer and 0 <= f < 1"""
    two_r = 2 * to_fraction(r)
    n = math.floor(two_r)
    return n, two_r - n


def _split_phase(theta: Fraction) -> tuple:
    """e^(i pi theta) = sign * e^(i pi t) with 0 <= t < 1"""
    t = to_fraction(theta) % 2
    if t >= 1:
        return t - 1, -1
    return t, 1


class PhasedScalar:
    """
    Finite sum of u^f e^(i pi t) QScalar with rational 0 <= f, t < 1.

    The keys (f, t) are treated as independent symbols; everything the relation
    checks produce is a zero test per key.
    """
    __slots__ = ('terms',)

    def __init__(self, terms=None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def monomial(cls, coeff=1, q_exponent=Fraction(0), phase=Fraction(0)):
        n, f = _split_u_exponent(q_exponent)
        t, sign = _split_phase(phase)
        return cls({(f, t): qscalar(coeff) * u ** n * sign})

    @classmethod
    def zero(cls):
        return cls()

    def __add__(self, other):
        other = _as_phased(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, ZERO) + v
        return PhasedScalar(terms)

    __radd__ = __add__

    def __neg__(self):
        return PhasedScalar({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_phased(other))

    def __rsub__(self, other):
        return _as_phased(other) - self

    def __mul__(self, other):
        other = _as_phased(other)
        terms = {}
        for (f1, t1), v1 in self.terms.items():
            for (f2, t2), v2 in other.terms.items():
                key, factor = combine_keys((f1, t1), (f2, t2))
                terms[key] = terms.get(key, ZERO) + v1 * v2 * factor
        return PhasedScalar(terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted((k, canonical(v)) for k, v in self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def inverse(self) -> 'PhasedScalar':
        """1 / self for a value carrying a single phase key"""
        from core.errors import ResidualPhaseError
        if not self.terms:
            raise DivisionByZeroError("inverse of a zero phased scalar")
        if len(self.terms) != 1:
            raise ResidualPhaseError(f"cannot invert a sum over phase keys {sorted(self.terms)}")
        (f, t), value = next(iter(self.terms.items()))
        value = ONE / value
        if f:
            f, value = 1 - f, value / u
        if t:
            t, value = 1 - t, -value
        return PhasedScalar({(f, t): value})

    def phases(self) -> set:
        return {t for (_, t) in self.terms}

    def as_qscalar(self) -> QScalar:
        """The plain QScalar value; raises if a fractional power or phase survives"""
        from core.errors import ResidualPhaseError
        if not self.terms:
            return ZERO
        if set(self.terms) != {(Fraction(0), Fraction(0))}:
            raise ResidualPhaseError(f"uncancelled phase keys {sorted(self.terms)}")
        return self.terms[(Fraction(0), Fraction(0))]

    def drop_phase(self) -> 'PhasedScalar':
        """Forgets the phase label of every term (used for phase-normalized comparisons)"""
        terms = {}
        for (f, _), v in self.terms.items():
            terms[(f, Fraction(0))] = terms.get((f, Fraction(0)), ZERO) + v
        return PhasedScalar(terms)

    def __repr__(self):
        inner = ', '.join(f"u^{f} e^(i pi {t}): {render(v)}" for (f, t), v in sorted(self.terms.items()))
        return f"PhasedScalar({inner})"


def combine_keys(k1: tuple, k2: tuple) -> tuple:
    """Multiplies two phase keys; returns (key, QScalar factor)"""
    f = k1[0] + k2[0]
    t = k1[1] + k2[1]
    factor = ONE
    if f >= 1:
        f -= 1
        factor = factor * u
    if t >= 1:
        t -= 1
        factor = -factor
    return (f, t), factor


PLAIN_KEY = (Fraction(0), Fraction(0))


def _as_phased(x) -> PhasedScalar:
    if isinstance(x, PhasedScalar):
        return x
    return PhasedScalar({PLAIN_KEY: qscalar(x)})


# ======================================================
# 📏 EXPONENT VECTORS AND SPARSE SERIES
# ======================================================

class ExpVector:
    """Immutable map from formal variable name to a nonzero rational exponent"""
    __slots__ = ('_items',)

    def __init__(self, exponents=None):
        cleaned = {k: to_fraction(v) for k, v in (exponents or {}).items() if v}
        self._items = tuple(sorted(cleaned.items()))

    def __getitem__(self, name):
        return dict(self._items).get(name, Fraction(0))

    def __add__(self, other):
        merged = dict(self._items)
        for k, v in other._items:
            merged[k] = merged.get(k, Fraction(0)) + v
        return ExpVector(merged)

    def __neg__(self):
        return ExpVector({k: -v for k, v in self._items})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, ExpVector) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def items(self):
        return self._items

    def __repr__(self):
        return 'ExpVector(' + ', '.join(f"{k}^{v}" for k, v in self._items) + ')'


@dataclass(frozen=True)
class SparseSeries:
    """
    Truncated series in one variable with rational exponents.

    Coefficients are exact for exponents in [lo, hi]; there are no terms below lo.
    """
    variable: str
    terms: dict = field(compare=False)
    lo: Fraction = Fraction(0)
    hi: Fraction = Fraction(0)

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            e = to_fraction(e)
            c = qscalar(c)
            if c and self.lo <= e <= self.hi:
                clean[e] = c
        object.__setattr__(self, 'terms', clean)
        object.__setattr__(self, 'lo', to_fraction(self.lo))
        object.__setattr__(self, 'hi', to_fraction(self.hi))

    def __eq__(self, other):
        if not isinstance(other, SparseSeries):
            return NotImplemented
        if (self.variable, self.lo, self.hi) != (other.variable, other.lo, other.hi):
            return False
        keys = set(self.terms) | set(other.terms)
        return all(not (self.terms.get(k, ZERO) - other.terms.get(k, ZERO)) for k in keys)

    def __hash__(self):
        return hash((self.variable, self.lo, self.hi, tuple(sorted(self.terms))))

    def coefficient(self, exponent) -> QScalar:
        return self.terms.get(to_fraction(exponent), ZERO)

    def truncate(self, hi) -> 'SparseSeries':
        hi = min(to_fraction(hi), self.hi)
        return SparseSeries(self.variable, self.terms, self.lo, hi)

    def scale(self, factor) -> 'SparseSeries':
        factor = qscalar(factor)
        return SparseSeries(self.variable, {e: c * factor for e, c in self.terms.items()}, self.lo, self.hi)

    def shift(self, offset) -> 'SparseSeries':
        offset = to_fraction(offset)
        return SparseSeries(self.variable, {e + offset: c for e, c in self.terms.items()},
                            self.lo + offset, self.hi + offset)

    def __add__(self, other):
        _check_variable(self, other)
        lo, hi = min(self.lo, other.lo), min(self.hi, other.hi)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, ZERO) + c
        return SparseSeries(self.variable, terms, lo, hi)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items())


def _check_variable(a: SparseSeries, b: SparseSeries):
    if a.variable != b.variable:
        raise VariableMismatchError(f"series in {a.variable} and {b.variable} cannot be combined")


def series_mul(a: SparseSeries, b: SparseSeries) -> SparseSeries:
    """
    Exact product, truncated where it stays exact.

    For two series starting at exponent 0 the result window is the intersection of
    the input windows.
    """
    _check_variable(a, b)
    lo = a.lo + b.lo
    hi = min(a.hi + b.lo, b.hi + a.lo)
    terms = {}
    for ea, ca in a.terms.items():
        for eb, cb in b.terms.items():
            e = ea + eb
            if e > hi:
                continue
            terms[e] = terms.get(e, ZERO) + ca * cb
    return SparseSeries(a.variable, terms, lo, hi)


def series_one(variable: str, hi) -> SparseSeries:
    return SparseSeries(variable, {Fraction(0): ONE}, Fraction(0), hi)


def series_exp(s: SparseSeries) -> SparseSeries:
    """exp(s) for a series with only positive exponents"""
    if any(e <= 0 for e in s.terms):
        raise ValueError("series_exp needs a series with positive exponents only")
    result = series_one(s.variable, s.hi)
    if not s.terms:
        return result
    valuation = min(s.terms)
    power = series_one(s.variable, s.hi)
    base = SparseSeries(s.variable, s.terms, Fraction(0), s.hi)
    k = 1
    while k * valuation <= s.hi:
        power = series_mul(power, base).scale(Fraction(1, k))
        result = result + power
        k += 1
    return result


def colored_partition_count(n: int, colors: int) -> int:
    """Number of partitions of n whose parts each carry one of `colors` colors"""
    if n == 0:
        return 1
    total = 0
    for p in partitions(n):
        count = 1
        for mult in p.values():
            count *= math.comb(colors + mult - 1, mult)
        total += count
    return total


def partition_series(colors: int, order: int, variable: str = 'q') -> SparseSeries:
    """prod_{n>=1} (1 - q^n)^(-colors) through q^order"""
    terms = {Fraction(n): qscalar(colored_partition_count(n, colors)) for n in range(order + 1)}
    return SparseSeries(variable, terms, Fraction(0), Fraction(order))


def binomial_series(shift, exponent, order: int, variable: str = 't') -> SparseSeries:
    """(1 - shift*t)^exponent through t^order, for rational exponent"""
    shift = qscalar(shift)
    exponent = to_fraction(exponent)
    terms = {}
    coeff = Fraction(1)
    for k in range(order + 1):
        terms[Fraction(k)] = qscalar(coeff) * (-shift) ** k
        coeff = coeff * (exponent - k) / (k + 1)
    return SparseSeries(variable, terms, Fraction(0), Fraction(order))
