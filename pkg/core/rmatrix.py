"""
Graded R-matrix of U_q[gl(N|N)^] on V (x) V and its defining identities
"""
import itertools
from dataclasses import dataclass, field

from sympy import QQ, Symbol
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from config import setup_logging
from core.coeffs import ONE, ZERO, q, specialize_q_one
from core.errors import SingularMatrixError
from core.reports import Report
from core.utils import stopwatch

logger = setup_logging()

# Spectral variables live next to u = q^(1/2) in one rational function field
Z_SYMBOL, W_SYMBOL = Symbol('z'), Symbol('w')
QQ_UZ = QQ.frac_field(Symbol('u'), Z_SYMBOL)
QQ_UZW = QQ.frac_field(Symbol('u'), Z_SYMBOL, W_SYMBOL)


def parity(j: int) -> int:
    """[v_j] = ((-1)^j + 1)/2: odd basis indices are even vectors"""
    return 1 if j % 2 == 0 else 0


def grading(N: int) -> tuple:
    return tuple(parity(j) for j in range(1, 2 * N + 1))


# ======================================================
# 🧮 ENTRIES
# ======================================================

def rmatrix_entry(i: int, j: int, k: int, l: int, x, domain=QQ_UZ):
    """
    R^{ij}_{kl}(x) for basis indices 1..2N, with R(v_i (x) v_j) = sum R^{ij}_{kl} v_k (x) v_l.

    x is an element of the domain's field; returns the zero element off the pattern.
    """
    K = domain.field
    qq = K.gens[0] ** 2
    one = K.one
    denominator = x * qq - qq ** -1
    if (i, j) == (k, l):
        if i == j:
            if i % 2 == 1:
                return one
            return (x * qq ** -1 - qq) / denominator
        return (x - one) / denominator
    if (i, j) == (l, k):
        # upper pair (i, j) = (j', i'), lower (k, l) = (i', j') in the exchange rows
        lower_i, lower_j = k, l
        sign = -1 if parity(lower_i) * parity(lower_j) else 1
        if lower_i < lower_j:
            return sign * (qq - qq ** -1) / denominator
        return sign * (qq - qq ** -1) * x / denominator
    return K.zero


def rmatrix_numerator(i: int, j: int, k: int, l: int) -> tuple:
    """
    (n0, n1) in QQ(u) with R^{ij}_{kl}(x) = (n0 + n1 x) / (x q - q^-1).

    Used where the common denominator is cleared before comparing series.
    """
    qq = q
    if (i, j) == (k, l):
        if i == j:
            if i % 2 == 1:
                return -qq ** -1, qq
            return -qq, qq ** -1
        return -ONE, ONE
    if (i, j) == (l, k):
        sign = -1 if parity(k) * parity(l) else 1
        if k < l:
            return sign * (qq - qq ** -1), ZERO
        return ZERO, sign * (qq - qq ** -1)
    return ZERO, ZERO


@dataclass
class RMatrix:
    """The R-matrix of rank N with optional sign mutations (entries given as (i, j, k, l))"""
    N: int
    grading: tuple
    entries: dict
    mutations: frozenset = field(default_factory=frozenset)

    @property
    def dim(self) -> int:
        return 2 * self.N

    def entry(self, i, j, k, l, x, domain):
        value = rmatrix_entry(i, j, k, l, x, domain)
        if (i, j, k, l) in self.mutations:
            value = -value
        return value

    def matrix(self, x, domain=QQ_UZ) -> DomainMatrix:
        """DomainMatrix M with M[(k,l),(i,j)] = R^{ij}_{kl}(x), 0-based pair index a*2N + b"""
        n = self.dim
        rows = {}
        for (i, j, k, l) in self.entries:
            value = self.entry(i, j, k, l, x, domain)
            if value:
                rows.setdefault(pair_index(k, l, n), {})[pair_index(i, j, n)] = value
        return DomainMatrix(rows, (n * n, n * n), domain)


def pair_index(a: int, b: int, n: int) -> int:
    return (a - 1) * n + (b - 1)


def pair_of(index: int, n: int) -> tuple:
    return index // n + 1, index % n + 1


def build_rmatrix(N: int, mutate=None) -> RMatrix:
    """All nonzero entries of R(z); `mutate` is an iterable of (i, j, k, l) whose sign is flipped"""
    if N < 1:
        raise ValueError("N must be positive")
    n = 2 * N
    z = QQ_UZ.field.gens[1]
    entries = {}
    for i, j in itertools.product(range(1, n + 1), repeat=2):
        for k, l in {(i, j), (j, i)}:
            value = rmatrix_entry(i, j, k, l, z)
            if value:
                entries[(i, j, k, l)] = value
    mutations = frozenset(mutate or ())
    for key in mutations:
        if key in entries:
            entries[key] = -entries[key]
    logger.debug(f"Built R-matrix N={N} with {len(entries)} nonzero entries")
    return RMatrix(N, grading(N), entries, mutations)


def mutate_rmatrix(R: RMatrix, entry: tuple) -> RMatrix:
    return build_rmatrix(R.N, mutate=set(R.mutations) ^ {entry})


def graded_permutation(N: int, domain=QQ_UZ) -> DomainMatrix:
    n = 2 * N
    K = domain.field
    rows = {}
    for i, j in itertools.product(range(1, n + 1), repeat=2):
        sign = -1 if parity(i) * parity(j) else 1
        rows.setdefault(pair_index(j, i, n), {})[pair_index(i, j, n)] = K(sign)
    return DomainMatrix(rows, (n * n, n * n), domain)


def identity(size: int, domain) -> DomainMatrix:
    return DomainMatrix.eye(size, domain).to_sparse()


# ======================================================
# 🔁 SUPERTRANSPOSITIONS
# ======================================================

def supertranspose(M: DomainMatrix, leg, N: int) -> DomainMatrix:
    """
    Partial supertransposition on V (x) V.

    st1: M^st1[(i,j),(k,l)] = M[(k,j),(i,l)] (-1)^([i]([i]+[k]))
    st2: M^st2[(i,j),(k,l)] = M[(i,l),(k,j)] (-1)^([j]([l]+[j]))
    st12: full supertransposition, M^st12[(i,j),(k,l)] = M[(k,l),(i,j)] (-1)^(([i]+[j])([i]+[j]+[k]+[l]))
    """
    n = 2 * N
    rows = {}
    for (r, c), value in M.to_dok().items():
        if not value:
            continue
        a, b = pair_of(r, n)
        s, t = pair_of(c, n)
        if leg == 1:
            # stored at [(k,j),(i,l)] with k=a, j=b, i=s, l=t
            i, j, k, l = s, b, a, t
            sign = parity(i) * (parity(i) + parity(k))
        elif leg == 2:
            # stored at [(i,l),(k,j)]
            i, l, k, j = a, b, s, t
            sign = parity(j) * (parity(l) + parity(j))
        elif leg == 12:
            # stored at [(k,l),(i,j)]
            k, l, i, j = a, b, s, t
            pi = parity(i) + parity(j)
            sign = pi * (pi + parity(k) + parity(l))
        else:
            raise ValueError(f"unknown leg {leg}")
        value = -value if sign % 2 else value
        rows.setdefault(pair_index(i, j, n), {})[pair_index(k, l, n)] = value
    return DomainMatrix(rows, M.shape, M.domain)


# ======================================================
# 🧩 TENSOR-LEG EMBEDDING
# ======================================================

def embed(M: DomainMatrix, legs: tuple, N: int) -> DomainMatrix:
    """
    Embeds an even two-leg operator into V (x) V (x) V with Koszul signs.

    M is expanded as sum M[(k,l),(i,j)] (-1)^(([l]+[j])[i]) E_ki (x) E_lj; a factor acting
    on a leg picks up (-1)^(its parity * parities of the vectors to its left).
    """
    n = 2 * N
    first, second = legs
    spectator = ({1, 2, 3} - set(legs)).pop()
    rows = {}
    for (r, c), value in M.to_dok().items():
        if not value:
            continue
        k, l = pair_of(r, n)
        i, j = pair_of(c, n)
        p_first = (parity(k) + parity(i)) % 2
        p_second = (parity(l) + parity(j)) % 2
        for s in range(1, n + 1):
            source = {first: i, second: j, spectator: s}
            target = {first: k, second: l, spectator: s}
            sign = p_second * parity(i)
            sign += p_first * sum(parity(source[leg]) for leg in range(1, first))
            sign += p_second * sum(parity(source[leg]) for leg in range(1, second))
            entry = -value if sign % 2 else value
            row = triple_index(target[1], target[2], target[3], n)
            col = triple_index(source[1], source[2], source[3], n)
            rows.setdefault(row, {})[col] = entry
    size = n ** 3
    return DomainMatrix(rows, (size, size), M.domain)


def triple_index(a: int, b: int, c: int, n: int) -> int:
    return ((a - 1) * n + (b - 1)) * n + (c - 1)


def count_nonzero(M: DomainMatrix) -> int:
    return sum(1 for value in M.to_dok().values() if value)


# ======================================================
# ✅ CHECKS
# ======================================================

def check_gybe(N: int, R: RMatrix = None) -> Report:
    """R12(z) R13(zw) R23(w) - R23(w) R13(zw) R12(z) over QQ(u, z, w)"""
    R = R or build_rmatrix(N)
    logger.info(f"🔺 Checking graded Yang-Baxter equation, N={N}")
    with stopwatch() as timing:
        _, z, w = QQ_UZW.field.gens
        r12 = embed(R.matrix(z, QQ_UZW), (1, 2), N)
        r13 = embed(R.matrix(z * w, QQ_UZW), (1, 3), N)
        r23 = embed(R.matrix(w, QQ_UZW), (2, 3), N)
        residual = r12 * r13 * r23 - r23 * r13 * r12
        nonzero = count_nonzero(residual)
    report = Report('ybe', N, nonzero, timing['ms'], {
        'entries_checked': (2 * N) ** 6,
        'mutations': sorted(R.mutations),
    })
    logger.info(f"{'✅' if report.passed else '❌'} YBE N={N}: {nonzero} nonzero residual entries")
    return report


def check_initial_condition(N: int, R: RMatrix = None) -> Report:
    R = R or build_rmatrix(N)
    with stopwatch() as timing:
        one = QQ_UZ.field.one
        residual = R.matrix(one) - graded_permutation(N)
        nonzero = count_nonzero(residual)
    return Report('initial', N, nonzero, timing['ms'])


def check_unitarity_crossing(N: int, R: RMatrix = None) -> list:
    """
    Unitarity R(z) P R(1/z) P = 1 and crossing-unitarity
    (R^-1)^st1(z) R^st1(z) = (z-1)^2/((q^-1 z - q)(zq - q^-1)).
    """
    R = R or build_rmatrix(N)
    K = QQ_UZ.field
    u, z = K.gens
    qq = u ** 2
    size = (2 * N) ** 2
    logger.info(f"🔁 Checking unitarity and crossing-unitarity, N={N}")

    with stopwatch() as timing:
        P = graded_permutation(N)
        Rz = R.matrix(z)
        unitarity = Rz * (P * R.matrix(z ** -1) * P) - identity(size, QQ_UZ)
        unitarity_nonzero = count_nonzero(unitarity)
    unitarity_report = Report('unitarity', N, unitarity_nonzero, timing['ms'])

    with stopwatch() as timing:
        try:
            inverse = Rz.inv()
        except DMNonInvertibleMatrixError as e:
            raise SingularMatrixError(f"R(z) is not invertible over QQ(u, z): {e}")
        product = supertranspose(inverse, 1, N) * supertranspose(Rz, 1, N)
        scalar = (z - 1) ** 2 / ((qq ** -1 * z - qq) * (z * qq - qq ** -1))
        crossing = product - identity(size, QQ_UZ) * QQ_UZ.convert(scalar)
        crossing_nonzero = count_nonzero(crossing)
    crossing_report = Report('crossing', N, crossing_nonzero, timing['ms'], {
        'scalar': '(z-1)^2/((q^-1 z - q)(z q - q^-1))',
    })

    for report in (unitarity_report, crossing_report):
        logger.info(f"{'✅' if report.passed else '❌'} {report.check} N={N}: "
                    f"{report.residual_nonzero_count} nonzero residual entries")
    return [unitarity_report, crossing_report]


def check_conservation(R: RMatrix) -> Report:
    """Weight, parity and sign-symmetry invariants of the nonzero entries"""
    violations = 0
    for (i, j, k, l), value in R.entries.items():
        if not value:
            continue
        if sorted((i, j)) != sorted((k, l)):
            violations += 1
        if (parity(i) + parity(j) - parity(k) - parity(l)) % 2:
            violations += 1
        if (parity(k) * parity(l) - parity(i) * parity(j)) % 2:
            violations += 1
    return Report('conservation', R.N, violations)


def specialize_rmatrix_q_one(R: RMatrix) -> dict:
    """q -> 1 limit of every nonzero entry, as rational functions of z"""
    return {key: specialize_q_one(value) for key, value in R.entries.items()}
