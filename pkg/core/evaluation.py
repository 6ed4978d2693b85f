"""
Evaluation modules V_z and V*S_z in the homogeneous gradation.

Every matrix entry of a mode-m generator is homogeneous of degree m in z, so the
z power is read off the mode label and matrices carry QScalar entries only.
"""
from fractions import Fraction
from functools import lru_cache

from sympy.polys.matrices import DomainMatrix

from config import setup_logging
from core.coeffs import ONE, QQ_U, ZERO, SparseSeries, q, qnum, qpow, qscalar, render, series_exp
from core.errors import IndexRangeError
from core.fock import cartan_data
from core.reports import RelationReport
from core.utils import run_jobs, stopwatch

logger = setup_logging()


def x_shift(i: int) -> int:
    """x_i = sum_(l<=i) (-1)^(l+1)"""
    return ((-1) ** (i + 1) + 1) // 2


class EvaluationModule:
    """Drinfeld generators on the 2N-dimensional evaluation module (dual=True for V*S_z)"""

    def __init__(self, N: int, dual: bool = False):
        if N < 1:
            raise ValueError("N must be positive")
        self.N = N
        self.dual = dual
        self.dim = 2 * N

    def _matrix(self, entries: dict) -> DomainMatrix:
        rows = {}
        for (r, c), value in entries.items():
            value = qscalar(value)
            if value:
                rows.setdefault(r - 1, {})[c - 1] = value
        return DomainMatrix(rows, (self.dim, self.dim), QQ_U)

    def _check_x(self, i: int):
        if not 1 <= i < self.dim:
            raise IndexRangeError(f"X^(+-,{i}) is defined for i = 1..{self.dim - 1}")

    def _check_h(self, j: int):
        if not 1 <= j <= self.dim:
            raise IndexRangeError(f"H^{j} is defined for j = 1..{self.dim}")

    def zero_mode_weights(self, j: int) -> tuple:
        """Integer diagonal of H^j_0"""
        self._check_h(j)
        sign = -1 if self.dual else 1
        if j < self.dim:
            return tuple(sign * (-1) ** (j + 1) if k in (j, j + 1) else 0 for k in range(1, self.dim + 1))
        return tuple(sign * (-1) ** (k + 1) for k in range(1, self.dim + 1))

    def h_diagonal(self, j: int, m: int) -> tuple:
        """Diagonal of H^j_m as QScalars"""
        if m == 0:
            return tuple(qscalar(w) for w in self.zero_mode_weights(j))
        self._check_h(j)
        N, dual = self.N, self.dual
        diag = [ZERO] * self.dim
        if j < self.dim:
            if dual:
                value = (-1) ** j * qnum(m) / m * qpow((-1) ** (j + 1) * m) * qpow(-x_shift(j) * m)
            else:
                value = (-1) ** (j + 1) * qnum(m) / m * qpow((-1) ** j * m) * qpow(x_shift(j) * m)
            diag[j - 1] = diag[j] = value
            return tuple(diag)
        qm = qpow(-m if dual else m)
        for l in range(1, N + 1):
            weight = 1 - N + (l - 1) * (ONE - qm)
            diag[2 * l - 2] += weight
            diag[2 * l - 1] += weight - qm
        prefactor = qnum(2 * m) / m * (-1 if dual else 1)
        return tuple(prefactor * d for d in diag)

    @lru_cache(maxsize=None)
    def H(self, j: int, m: int) -> DomainMatrix:
        return self._matrix({(k, k): d for k, d in enumerate(self.h_diagonal(j, m), start=1)})

    @lru_cache(maxsize=None)
    def X(self, sign: int, i: int, m: int) -> DomainMatrix:
        self._check_x(i)
        if not self.dual:
            scale = qpow(x_shift(i) * m)
            if sign > 0:
                return self._matrix({(i, i + 1): scale})
            return self._matrix({(i + 1, i): (-1) ** (i + 1) * scale})
        scale = qpow(-x_shift(i) * m)
        if sign > 0:
            return self._matrix({(i + 1, i): -(-1) ** i * qpow((-1) ** i) * scale})
        return self._matrix({(i, i + 1): -qpow((-1) ** (i + 1)) * scale})

    @lru_cache(maxsize=None)
    def psi(self, sign: int, j: int, k: int) -> DomainMatrix:
        """Mode k of psi^(+-,j)(w) = q^(+-H^j_0) exp(+-(q - q^-1) sum_(n>0) H^j_(+-n) w^(-+n))"""
        if sign * k < 0:
            return self._matrix({})
        order = abs(k)
        zero_modes = self.zero_mode_weights(j)
        modes = {n: self.h_diagonal(j, sign * n) for n in range(1, order + 1)}
        entries = {}
        for slot in range(self.dim):
            exponent = {Fraction(n): sign * (q - q ** -1) * modes[n][slot] for n in modes}
            series = series_exp(SparseSeries('w', exponent, Fraction(0), Fraction(order)))
            d0 = zero_modes[slot]
            entries[(slot + 1, slot + 1)] = qpow(sign * d0) * series.coefficient(order)
        return self._matrix(entries)


def evaluation_generators(N: int, dual: bool = False) -> EvaluationModule:
    return EvaluationModule(N, dual)


def graded_bracket(a: DomainMatrix, b: DomainMatrix, odd: bool) -> DomainMatrix:
    return a * b + b * a if odd else a * b - b * a


def _compare(name: str, parameters: dict, lhs: DomainMatrix, rhs: DomainMatrix) -> RelationReport:
    report = RelationReport(name, parameters)
    with stopwatch() as timing:
        residual = (lhs - rhs).to_dok()
        report.checked_dim = lhs.shape[0] * lhs.shape[1]
        for (r, c), value in sorted(residual.items()):
            if value:
                report.record_failure(f"{name} entry ({r + 1},{c + 1}): {render(value)}")
    report.elapsed_ms = timing['ms']
    return report


def evaluation_jobs(module: EvaluationModule, M: int) -> list:
    rank = module.dim
    a = cartan_data(module.N).a
    modes = range(-M, M + 1)
    nonzero = [m for m in modes if m]
    zero = module._matrix({})
    jobs = []

    for j in range(1, rank + 1):
        for jp in range(1, rank + 1):
            for m in modes:
                for n in modes:
                    jobs.append(('HH', {'j': j, 'jp': jp, 'm': m, 'n': n},
                                 lambda j=j, jp=jp, m=m, n=n: graded_bracket(module.H(j, m), module.H(jp, n), False),
                                 lambda: zero))
    for sign in (1, -1):
        for j in range(1, rank + 1):
            for i in range(1, rank):
                for m in nonzero:
                    for n in modes:
                        coeff = sign * qnum(a[j - 1][i - 1] * m) / m
                        jobs.append(('HX', {'sign': sign, 'j': j, 'i': i, 'm': m, 'n': n},
                                     lambda j=j, i=i, m=m, n=n, sign=sign: graded_bracket(
                                         module.H(j, m), module.X(sign, i, n), False),
                                     lambda c=coeff, i=i, m=m, n=n, sign=sign: module.X(sign, i, n + m) * c))
    scale = ONE / (q - q ** -1)
    for i in range(1, rank):
        for ip in range(1, rank):
            for n in modes:
                for m in modes:
                    if i == ip:
                        rhs = (lambda i=i, k=n + m: (module.psi(1, i, k) - module.psi(-1, i, k)) * scale)
                    else:
                        rhs = lambda: zero
                    jobs.append(('X+X-', {'i': i, 'ip': ip, 'n': n, 'm': m},
                                 lambda i=i, ip=ip, n=n, m=m: graded_bracket(
                                     module.X(1, i, n), module.X(-1, ip, m), True),
                                 rhs))
    for sign in (1, -1):
        for i in range(1, rank):
            for ip in range(i, rank):
                if a[i - 1][ip - 1]:
                    continue
                for n in modes:
                    for m in modes:
                        jobs.append(('XX-null', {'sign': sign, 'i': i, 'ip': ip, 'n': n, 'm': m},
                                     lambda i=i, ip=ip, n=n, m=m, sign=sign: graded_bracket(
                                         module.X(sign, i, n), module.X(sign, ip, m), True),
                                     lambda: zero))
    return jobs


def verify_evaluation(N: int, dual: bool = False, M: int = 1, threads: int = 1) -> list:
    """Level-zero Drinfeld relations on V_z or V*S_z"""
    module = evaluation_generators(N, dual)
    jobs = evaluation_jobs(module, M)
    name = 'V*S_z' if dual else 'V_z'
    logger.info(f"🔬 Evaluation module {name} N={N}: {len(jobs)} relations")
    reports = run_jobs(lambda job: _compare(job[0], job[1], job[2](), job[3]()), jobs, threads)
    failed = sum(1 for r in reports if not r.passed)
    logger.info(f"{'✅' if not failed else '❌'} {name}: {len(reports) - failed}/{len(reports)} passed")
    return reports
