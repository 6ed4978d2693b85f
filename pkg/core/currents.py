"""
Drinfeld currents and Chevalley generators of U_q[gl(N|N)^] at level one, and their relation suites
"""
from dataclasses import dataclass
from fractions import Fraction

from config import CHECKED_FOCK_STATES_LIMIT, QGLNN_RADIUS, QGLNN_THREADS, setup_logging
from core.coeffs import ONE, ZERO, PhasedScalar, q, qnum, qpow, qscalar
from core.errors import IndexRangeError
from core.fock import (
    Diagonal, ExpTerm, ExpField, LatticePoint, LinComb, OscillatorMode, Product, a_color,
    bracket, c_color, color_count, combo_coefficients, compare_on_states, dot,
    enumerate_basis, exp_field, field_c, field_H, field_H_minus, field_H_plus,
    guarded_states, identity_operator, materialize,
)
from core.reports import RelationReport
from core.utils import run_jobs, stopwatch

logger = setup_logging()

KINDS = ('Xplus', 'Xminus', 'PsiPlus', 'PsiMinus', 'H', 'Hzero',
         'Chevalley_e', 'Chevalley_f', 'Chevalley_h', 'e0', 'f0', 'h0')


@dataclass(frozen=True)
class GeneratorId:
    kind: str
    index: int = 0
    mode: int = 0

    def describe(self) -> str:
        return f"{self.kind}[{self.index}]_{self.mode}"


def extended_cartan(N: int) -> list:
    """(alpha_i, alpha_j) for i, j = 0..2N with alpha_0 = delta - eps_1 + eps_2N"""
    n = 2 * N
    roots = [{1: -1, n: 1}] + [{l: 1, l + 1: -1} for l in range(1, n)] + [{k: 1 for k in range(1, n + 1)}]

    def form(x, y):
        return sum(c * y.get(k, 0) * (1 if k % 2 == 1 else -1) for k, c in x.items())

    return [[form(x, y) for y in roots] for x in roots]


def q_bracket_power(l: int) -> object:
    """q^((-1)^l)"""
    return q if l % 2 == 0 else q ** -1


class CurrentAlgebra:
    """
    The level-one realization on the Fock space of rank N.

    drop_cocycle names one (sign, i) whose F^(sign,i) is replaced by 1, so the
    relation suites can be seen to fail.
    """

    def __init__(self, N: int, drop_cocycle=None):
        if N < 1:
            raise ValueError("N must be positive")
        self.N = N
        self.combo = combo_coefficients(N)
        self.drop_cocycle = drop_cocycle
        self._fields = {}
        self._modes = {}

    @property
    def rank(self) -> int:
        return 2 * self.N

    def _check_x(self, i: int):
        if not 1 <= i < self.rank:
            raise IndexRangeError(f"X^(+-,{i}) is defined for i = 1..{self.rank - 1}")

    def _check_h(self, j: int):
        if not 1 <= j <= self.rank:
            raise IndexRangeError(f"H^{j} is defined for j = 1..{self.rank}")

    # ======================================================
    # 🌊 CURRENTS
    # ======================================================

    def cocycle(self, sign: int, i: int) -> tuple:
        """F^(+-,2k-1) = prod_(l<k) e^(+-i pi a^(2l-1)_0), F^(+-,2k) = prod_(l<=k) e^(-+i pi a^(2l-1)_0)"""
        vector = [Fraction(0)] * color_count(self.N)
        if self.drop_cocycle == (sign, i):
            return tuple(vector)
        k = (i + 1) // 2
        if i % 2 == 1:
            for l in range(1, k):
                vector[a_color(2 * l - 1)] = Fraction(sign)
        else:
            for l in range(1, k + 1):
                vector[a_color(2 * l - 1)] = Fraction(-sign)
        return tuple(vector)

    def x_field(self, sign: int, i: int) -> ExpField:
        """X^(+-,i)(z) = :e^(+-H^i(z; -+1/2)) Y^(+-,i)(z): F^(+-,i), modes at z^(-n-1)"""
        self._check_x(i)
        key = ('X', sign, i)
        if key in self._fields:
            return self._fields[key]
        k = (i + 1) // 2
        base = field_H(self.combo, i, Fraction(-sign, 2))
        if sign < 0:
            base = -base
        c_field = field_c(self.combo, k)
        cocycle = self.cocycle(sign, i)
        difference_form = (sign < 0) == (i % 2 == 1)
        if difference_form:
            # (e^(-c(qz)) - e^(-c(z/q))) / (z (q - q^-1))
            scale = ONE / (q - q ** -1)
            terms = (
                ExpTerm(base - c_field.at(1), scale, Fraction(-1), cocycle),
                ExpTerm(base - c_field.at(-1), -scale, Fraction(-1), cocycle),
            )
        else:
            coeff = ONE if sign > 0 else -ONE
            terms = (ExpTerm(base + c_field, coeff, Fraction(0), cocycle),)
        label = f"X{'+' if sign > 0 else '-'}{i}"
        spec = ExpField(terms, parity=1, mode_offset=Fraction(1), label=label)
        self._fields[key] = spec
        return spec

    def psi_field(self, sign: int, j: int) -> ExpField:
        """psi^(+-,j)(z) = e^(H^j_+-(z)), modes at z^(-n)"""
        self._check_h(j)
        key = ('psi', sign, j)
        if key not in self._fields:
            linear = field_H_plus(self.combo, j) if sign > 0 else field_H_minus(self.combo, j)
            self._fields[key] = exp_field(linear, label=f"psi{'+' if sign > 0 else '-'}{j}")
        return self._fields[key]

    def eta_field(self, l: int, sign: int = 1) -> ExpField:
        """eta^l(z) = :e^(c^l(z)): (modes z^(-n-1)); sign -1 gives xi^l(z) = :e^(-c^l(z)): (modes z^(-n))"""
        key = ('eta', sign, l)
        if key not in self._fields:
            linear = field_c(self.combo, l)
            if sign > 0:
                self._fields[key] = exp_field(linear, parity=1, mode_offset=1, label=f"eta{l}")
            else:
                self._fields[key] = exp_field(-linear, parity=1, mode_offset=0, label=f"xi{l}")
        return self._fields[key]

    def _mode(self, key, build):
        if key not in self._modes:
            self._modes[key] = build()
        return self._modes[key]

    def X(self, sign: int, i: int, n: int):
        return self._mode(('X', sign, i, n), lambda: self.x_field(sign, i).mode(n))

    def psi(self, sign: int, j: int, n: int):
        return self._mode(('psi', sign, j, n), lambda: self.psi_field(sign, j).mode(n))

    def eta(self, l: int, n: int = 0):
        return self._mode(('eta', l, n), lambda: self.eta_field(l, 1).mode(n))

    def xi(self, l: int, n: int = 0):
        return self._mode(('xi', l, n), lambda: self.eta_field(l, -1).mode(n))

    def H(self, j: int, n: int):
        self._check_h(j)
        return self._mode(('H', j, n), lambda: OscillatorMode(self.N, self.combo.A(j, n), n, f"H{j}_{n}"))

    # ======================================================
    # 🔷 CARTAN PART
    # ======================================================

    def cartan_eigenvalue(self, j: int, lattice: LatticePoint) -> Fraction:
        """h_j on a lattice point, j = 0..2N"""
        if j == 0:
            return 1 - sum(dot(self.combo.A_zero(k), lattice.charges) for k in range(1, self.rank))
        self._check_h(j)
        return dot(self.combo.A_zero(j), lattice.charges)

    def q_power(self, weights: dict, constant=0) -> Diagonal:
        """q^(constant + sum_j weights[j] h_j) as a diagonal operator"""
        def value(state):
            exponent = Fraction(constant) + sum(
                (Fraction(w) * self.cartan_eigenvalue(j, state.lattice) for j, w in weights.items()), Fraction(0))
            return PhasedScalar.monomial(1, q_exponent=exponent)

        label = 'q^(' + '+'.join(f"{w}h{j}" for j, w in sorted(weights.items())) + ')'
        return Diagonal(value, label)

    def q_bracket_h(self, j: int) -> Diagonal:
        """(q^(h_j) - q^(-h_j)) / (q - q^-1)"""
        def value(state):
            x = self.cartan_eigenvalue(j, state.lattice)
            difference = PhasedScalar.monomial(1, q_exponent=x) - PhasedScalar.monomial(1, q_exponent=-x)
            return difference * PhasedScalar.monomial(ONE / (q - q ** -1))

        return Diagonal(value, f"[h{j}]")

    def h(self, j: int) -> Diagonal:
        return Diagonal(lambda state: qscalar(self.cartan_eigenvalue(j, state.lattice)), f"h{j}")

    # ======================================================
    # 🔶 CHEVALLEY GENERATORS
    # ======================================================

    def e(self, i: int):
        if i == 0:
            return self._mode(('e', 0), self._build_e0)
        return self.X(1, i, 0)

    def f(self, i: int):
        if i == 0:
            return self._mode(('f', 0), self._build_f0)
        return self.X(-1, i, 0)

    def _sum_h(self, sign: int) -> Diagonal:
        return self.q_power({k: sign for k in range(1, self.rank)})

    def _build_e0(self):
        inner = self.X(-1, 1, 1)
        for l in range(2, self.rank):
            inner = bracket(self.X(-1, l, 0), inner, q_bracket_power(l))
        return Product([inner, self._sum_h(-1)], label='e0')

    def _build_f0(self):
        inner = self.X(1, 1, -1)
        for l in range(2, self.rank):
            inner = bracket(inner, self.X(1, l, 0), q_bracket_power(l + 1))
        sign = ONE if self.N % 2 == 0 else -ONE
        return LinComb([(sign, Product([self._sum_h(1), inner]))], label='f0')

    # ======================================================
    # 🧭 GENERATOR LOOKUP
    # ======================================================

    def operator(self, g: GeneratorId):
        if g.kind == 'Xplus':
            return self.X(1, g.index, g.mode)
        if g.kind == 'Xminus':
            return self.X(-1, g.index, g.mode)
        if g.kind == 'PsiPlus':
            return self.psi(1, g.index, g.mode)
        if g.kind == 'PsiMinus':
            return self.psi(-1, g.index, g.mode)
        if g.kind == 'H':
            if g.mode == 0:
                raise IndexRangeError("H^j_0 is the zero mode; use Hzero")
            return self.H(g.index, g.mode)
        if g.kind == 'Hzero':
            return self.H(g.index, 0)
        if g.kind == 'Chevalley_e':
            self._check_x(g.index)
            return self.e(g.index)
        if g.kind == 'Chevalley_f':
            self._check_x(g.index)
            return self.f(g.index)
        if g.kind == 'Chevalley_h':
            self._check_h(g.index)
            return self.h(g.index)
        if g.kind == 'e0':
            return self.e(0)
        if g.kind == 'f0':
            return self.f(0)
        if g.kind == 'h0':
            return self.h(0)
        raise IndexRangeError(f"unknown generator kind {g.kind}")

    def current_charges(self) -> list:
        charges = []
        for i in range(1, self.rank):
            for sign in (1, -1):
                charges.append(self.x_field(sign, i).charge)
        return charges


_ALGEBRAS = {}


def current_algebra(N: int, drop_cocycle=None) -> CurrentAlgebra:
    """Shared algebra per (N, mutation) so that mode images are cached across calls"""
    key = (N, drop_cocycle)
    if key not in _ALGEBRAS:
        _ALGEBRAS[key] = CurrentAlgebra(N, drop_cocycle)
    return _ALGEBRAS[key]


def current_mode(g: GeneratorId, basis, N: int = None):
    N = N or basis.lattice_window[0].N
    return materialize(current_algebra(N).operator(g), basis)


def chevalley(g: GeneratorId, basis, N: int = None):
    if not g.kind.startswith('Chevalley') and g.kind not in ('e0', 'f0', 'h0'):
        raise IndexRangeError(f"{g.kind} is not a Chevalley generator")
    return current_mode(g, basis, N)


def standard_window(algebra: CurrentAlgebra, radius: int = 1, origin: LatticePoint = None) -> list:
    """Lattice points reachable from the origin by at most `radius` current applications"""
    origin = origin or LatticePoint.origin(algebra.N)
    points = {origin}
    frontier = {origin}
    for _ in range(radius):
        frontier = {p.shifted(c) for p in frontier for c in algebra.current_charges()} - points
        points |= frontier
    return sorted(points)


# ======================================================
# ✅ RELATION SUITES
# ======================================================

ZERO_OPERATOR = LinComb([], label='0')


def _check(name: str, parameters: dict, lhs, rhs, basis, reach: int) -> RelationReport:
    # the vacuum sector is always checked; images are exact so reach only bounds the work
    states, guard, capped = guarded_states(basis, min(reach, basis.max_degree), CHECKED_FOCK_STATES_LIMIT)
    report = RelationReport(name, parameters, truncation_guard=guard)
    report.note_capped(capped)
    with stopwatch() as timing:
        compare_on_states(lhs, rhs, states, report, name)
    report.elapsed_ms = timing['ms']
    if not report.passed:
        logger.warning(f"❌ {name} {parameters}: {report.residual_nonzero} residual entries")
    return report


def _run(jobs: list, threads: int) -> list:
    return run_jobs(lambda job: job(), jobs, threads)


def drinfeld_jobs(algebra: CurrentAlgebra, basis, M: int) -> list:
    """Closures, one per relation instance, each returning a RelationReport"""
    N, rank = algebra.N, algebra.rank
    a = algebra.combo.cartan.a
    modes = range(-M, M + 1)
    nonzero = [n for n in modes if n]
    jobs = []

    def add(name, params, lhs_fn, rhs_fn, reach):
        jobs.append(lambda: _check(name, params, lhs_fn(), rhs_fn(), basis, reach))

    for j in range(1, rank + 1):
        for jp in range(1, rank + 1):
            for n in nonzero:
                for m in (-n, n):
                    central = qnum(a[j - 1][jp - 1] * n) * qnum(n) / n if m == -n else ZERO
                    add('HH', {'j': j, 'jp': jp, 'n': n, 'm': m},
                        lambda j=j, jp=jp, n=n, m=m: bracket(algebra.H(j, n), algebra.H(jp, m)),
                        lambda c=central: LinComb([(c, identity_operator())]),
                        abs(n) + abs(m))

    for sign in (1, -1):
        for i in range(1, rank):
            for j in range(1, rank + 1):
                for n in nonzero:
                    for m in modes:
                        coeff = qnum(a[i - 1][j - 1] * n) / n * qpow(Fraction(-sign * abs(n), 2)) * sign
                        add('HX', {'sign': sign, 'j': j, 'i': i, 'n': n, 'm': m},
                            lambda j=j, i=i, n=n, m=m, sign=sign: bracket(algebra.H(j, n), algebra.X(sign, i, m)),
                            lambda c=coeff, i=i, n=n, m=m, sign=sign: LinComb([(c, algebra.X(sign, i, n + m))]),
                            abs(n) + abs(m) + 1)
                for m in modes:
                    add('qH-X', {'sign': sign, 'j': j, 'i': i, 'm': m},
                        lambda j=j, i=i, m=m, sign=sign: Product(
                            [algebra.q_power({j: 1}), algebra.X(sign, i, m), algebra.q_power({j: -1})]),
                        lambda j=j, i=i, m=m, sign=sign: LinComb(
                            [(q ** (sign * a[i - 1][j - 1]), algebra.X(sign, i, m))]),
                        abs(m) + 1)

    scale = ONE / (q - q ** -1)
    for i in range(1, rank):
        for ip in range(1, rank):
            for n in modes:
                for m in modes:
                    if i == ip:
                        rhs = (lambda i=i, n=n, m=m: LinComb([
                            (scale * qpow(Fraction(n - m, 2)), algebra.psi(1, i, n + m)),
                            (-scale * qpow(Fraction(m - n, 2)), algebra.psi(-1, i, n + m)),
                        ]))
                    else:
                        rhs = lambda: ZERO_OPERATOR
                    add('X+X-', {'i': i, 'ip': ip, 'n': n, 'm': m},
                        lambda i=i, ip=ip, n=n, m=m: bracket(algebra.X(1, i, n), algebra.X(-1, ip, m)),
                        rhs, abs(n) + abs(m) + 2)

    for sign in (1, -1):
        for i in range(1, rank):
            for ip in range(i, rank):
                if a[i - 1][ip - 1] == 0:
                    for n in modes:
                        for m in modes:
                            add('XX-null', {'sign': sign, 'i': i, 'ip': ip, 'n': n, 'm': m},
                                lambda i=i, ip=ip, n=n, m=m, sign=sign: bracket(
                                    algebra.X(sign, i, n), algebra.X(sign, ip, m)),
                                lambda: ZERO_OPERATOR, abs(n) + abs(m) + 2)
                elif abs(i - ip) <= 1:
                    for n in range(-M, M):
                        for m in range(-M, M):
                            x = q ** (sign * a[i - 1][ip - 1])
                            add('XX-quadratic', {'sign': sign, 'i': i, 'ip': ip, 'n': n, 'm': m},
                                lambda i=i, ip=ip, n=n, m=m, sign=sign, x=x: bracket(
                                    algebra.X(sign, i, n + 1), algebra.X(sign, ip, m), x),
                                lambda i=i, ip=ip, n=n, m=m, sign=sign, x=x: bracket(
                                    algebra.X(sign, ip, m + 1), algebra.X(sign, i, n), x),
                                abs(n) + abs(m) + 3)

    serre_modes = [(0, 0, 0, 0)] + ([(1, 0, -1, 0)] if M >= 1 else [])
    for sign in (1, -1):
        for l in range(2, rank - 1):
            for (m, mp, n, np_) in serre_modes:
                def serre(l=l, m=m, mp=mp, n=n, np_=np_, sign=sign):
                    def word(first, second):
                        return bracket(
                            bracket(algebra.X(sign, l, first), algebra.X(sign, l - 1, mp), q_bracket_power(l)),
                            bracket(algebra.X(sign, l, second), algebra.X(sign, l + 1, np_), q_bracket_power(l + 1)))
                    return LinComb([(ONE, word(m, n)), (ONE, word(n, m))])
                add('Serre', {'sign': sign, 'l': l, 'm': m, 'mp': mp, 'n': n, 'np': np_},
                    serre, lambda: ZERO_OPERATOR, abs(m) + abs(mp) + abs(n) + abs(np_) + 4)

    for j in range(1, rank + 1):
        for n in range(1, M + 1):
            add('psi+triangular', {'j': j, 'n': -n}, lambda j=j, n=n: algebra.psi(1, j, -n),
                lambda: ZERO_OPERATOR, n)
            add('psi-triangular', {'j': j, 'n': n}, lambda j=j, n=n: algebra.psi(-1, j, n),
                lambda: ZERO_OPERATOR, n)
        for sign in (1, -1):
            add('psi-zero', {'sign': sign, 'j': j}, lambda j=j, sign=sign: algebra.psi(sign, j, 0),
                lambda j=j, sign=sign: algebra.q_power({j: sign}), 0)
    return jobs


def verify_drinfeld(N: int, D: int, M: int = 1, radius: int = QGLNN_RADIUS, threads: int = QGLNN_THREADS,
                    drop_cocycle=None) -> list:
    """Every Drinfeld relation as a guarded identity on the standard lattice window"""
    algebra = current_algebra(N, drop_cocycle)
    basis = enumerate_basis(standard_window(algebra, radius), D)
    jobs = drinfeld_jobs(algebra, basis, M)
    logger.info(f"🔬 Drinfeld relations N={N} D={D} |n|<={M}: {len(jobs)} checks on {len(basis)} states")
    reports = _run(jobs, threads)
    failed = sum(1 for r in reports if not r.passed)
    logger.info(f"{'✅' if not failed else '❌'} Drinfeld suite: {len(reports) - failed}/{len(reports)} passed")
    return reports


def chevalley_jobs(algebra: CurrentAlgebra, basis) -> list:
    rank = algebra.rank
    extended = extended_cartan(algebra.N)
    jobs = []

    def add(name, params, lhs_fn, rhs_fn, reach):
        jobs.append(lambda: _check(name, params, lhs_fn(), rhs_fn(), basis, reach))

    for i in range(rank):
        for j in range(rank + 1):
            for kind, sign in (('e', 1), ('f', -1)):
                gen = algebra.e if kind == 'e' else algebra.f
                add(f'qh-{kind}', {'i': i, 'j': j},
                    lambda i=i, j=j, gen=gen: Product(
                        [algebra.q_power({j: 1}), gen(i), algebra.q_power({j: -1})]),
                    lambda i=i, j=j, gen=gen, sign=sign: LinComb(
                        [(q ** (sign * extended[i][j]), gen(i))]),
                    2)
        for ip in range(rank):
            rhs = (lambda i=i: LinComb([(ONE, algebra.q_bracket_h(i))])) if i == ip else (lambda: ZERO_OPERATOR)
            add('e-f', {'i': i, 'ip': ip},
                lambda i=i, ip=ip: bracket(algebra.e(i), algebra.f(ip)), rhs, 2)
    for i in range(1, rank):
        for ip in range(i, rank):
            if extended[i][ip] == 0:
                add('e-e', {'i': i, 'ip': ip}, lambda i=i, ip=ip: bracket(algebra.e(i), algebra.e(ip)),
                    lambda: ZERO_OPERATOR, 2)
                add('f-f', {'i': i, 'ip': ip}, lambda i=i, ip=ip: bracket(algebra.f(i), algebra.f(ip)),
                    lambda: ZERO_OPERATOR, 2)
    return jobs


def verify_chevalley(N: int, D: int, radius: int = QGLNN_RADIUS, threads: int = QGLNN_THREADS,
                     drop_cocycle=None) -> list:
    algebra = current_algebra(N, drop_cocycle)
    basis = enumerate_basis(standard_window(algebra, radius), D)
    jobs = chevalley_jobs(algebra, basis)
    logger.info(f"🔬 Chevalley relations N={N} D={D}: {len(jobs)} checks")
    return _run(jobs, threads)


def eta_jobs(algebra: CurrentAlgebra, basis, M: int) -> list:
    jobs = []
    for l in range(1, algebra.N + 1):
        for sign in (1, -1):
            for i in range(1, algebra.rank):
                charge = algebra.x_field(sign, i).charge[c_color(algebra.N, l)]
                graded = ONE if charge % 2 == 0 else -ONE
                for m in range(-M, M + 1):
                    def job(l=l, sign=sign, i=i, m=m, graded=graded):
                        lhs = Product([algebra.eta(l), algebra.X(sign, i, m)])
                        rhs = LinComb([(graded, Product([algebra.X(sign, i, m), algebra.eta(l)]))])
                        return _check('eta-X', {'l': l, 'sign': sign, 'i': i, 'm': m}, lhs, rhs, basis, abs(m) + 2)
                    jobs.append(job)
    return jobs


def verify_eta_compatibility(N: int, D: int, M: int = 1, threads: int = QGLNN_THREADS) -> list:
    """eta^l_0 X = (-1)^(c^l charge of X) X eta^l_0 for every current mode"""
    algebra = current_algebra(N)
    basis = enumerate_basis([LatticePoint.origin(N)], D)
    return _run(eta_jobs(algebra, basis, M), threads)
