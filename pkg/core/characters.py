"""
Characters and supercharacters of the rank-two Fock modules and their submodules
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from config import QGLNN_THREADS, setup_logging
from core.coeffs import PLAIN_KEY, ZERO, SparseSeries, as_rational, colored_partition_count, qscalar
from core.currents import current_algebra
from core.errors import NonConstantError, QglnnError, UnknownModuleError
from core.fock import FockState, LatticePoint, Product, color_count, colored_multisets
from core.gl22 import (
    RANK_N, SELECTOR_SIDES, SELECTORS, ModuleSpec, module_offset, sector_box, zero_mode_energy,
)
from core.reports import RelationReport
from core.utils import fraction_str, qscalar_json, run_jobs, stopwatch
from core.vertexops import nf_number

logger = setup_logging()

METHODS = ('bruteforce', 'projector', 'brst', 'closed')
PROPS = ('falpha-full', 'f01-sub', 'f10-sub', 'falpha-sub')

# projector words, the rightmost factor acts first
SELECTOR_WORDS = {
    'KKer': (('eta', 1), ('xi', 1), ('eta', 2), ('xi', 2)),
    'KCoker': (('eta', 1), ('xi', 1), ('xi', 2), ('eta', 2)),
    'CKer': (('xi', 1), ('eta', 1), ('eta', 2), ('xi', 2)),
    'CCoker': (('xi', 1), ('eta', 1), ('xi', 2), ('eta', 2)),
}


# ======================================================
# 📈 CHARACTER SERIES
# ======================================================

@dataclass
class CharSeries:
    """
    sum over weight sectors of x^h times a series in q.

    Exponents in `terms` are relative to global_q_offset and exact through max_q_order;
    graded series carry the overall sign e^(i pi global_phase).
    """
    global_q_offset: Fraction
    terms: dict
    max_q_order: int
    global_phase: Fraction = Fraction(0)
    graded: bool = False
    details: dict = field(default_factory=dict)
    window: frozenset = frozenset()

    def sector(self, key) -> SparseSeries:
        key = tuple(Fraction(x) for x in key)
        if key in self.terms:
            return self.terms[key]
        return SparseSeries('q', {}, Fraction(0), Fraction(self.max_q_order))

    def coefficient(self, key, exponent):
        return self.sector(key).coefficient(exponent)

    def leading(self, key) -> tuple:
        """(lowest relative exponent, coefficient) of one sector"""
        exponent, coeff = self.sector(key).sorted_terms()[0]
        return exponent, coeff

    def as_dict(self) -> dict:
        terms = []
        for key, series in sorted(self.terms.items()):
            terms.append({
                'x_exponents': [fraction_str(x) for x in key],
                'q_series': [[fraction_str(e), _coefficient_json(c)] for e, c in series.sorted_terms()],
            })
        return {
            'offset': fraction_str(self.global_q_offset),
            'phase': fraction_str(self.global_phase),
            'graded': self.graded,
            'max_q_order': self.max_q_order,
            'terms': terms,
            'details': self.details,
        }


def _coefficient_json(c):
    try:
        return fraction_str(as_rational(c))
    except NonConstantError:
        return qscalar_json(c)


def _series(contributions: dict, D: int) -> SparseSeries:
    lo = min(contributions, default=Fraction(0))
    return SparseSeries('q', contributions, min(lo, Fraction(0)), Fraction(D))


def _collect(offset, D, sector_results, phase, graded, details) -> CharSeries:
    terms = {}
    window = set()
    for key, contributions in sector_results:
        window.add(key)
        series = _series(contributions, D)
        if series.terms:
            terms[key] = series
    phase = Fraction(phase) % 2 if graded else Fraction(0)
    return CharSeries(offset, terms, D, phase, graded, details, frozenset(window))


def weight_key(lattice: LatticePoint) -> tuple:
    """(h1, h2, h3, h4) of a lattice point"""
    algebra = current_algebra(RANK_N)
    return tuple(algebra.cartan_eigenvalue(j, lattice) for j in range(1, 2 * RANK_N + 1))


def check_injective(spec: ModuleSpec, radius: int) -> dict:
    """weight key -> sector over the box; raises if two sectors share a weight"""
    seen = {}
    for sector in sector_box(radius):
        key = weight_key(spec.lattice(*sector))
        if key in seen:
            raise QglnnError(f"sectors {seen[key]} and {sector} of {spec.describe()} share weight {key}")
        seen[key] = sector
    return seen


# ======================================================
# 🔢 SHIFT RANGES
# ======================================================

def shift_range(b, budget) -> list:
    """l >= 1 with (1/2)(l^2 + b l) <= budget"""
    top = int(abs(b)) + math.isqrt(max(int(2 * budget), 0) + 1) + 2
    return [l for l in range(1, top + 1) if Fraction(l * l + b * l, 2) <= budget]


def shift_minimum(b) -> Fraction:
    top = int(abs(b)) + 2
    return min(Fraction(l * l + b * l, 2) for l in range(1, top + 1))


# ======================================================
# 🔨 BRUTE FORCE
# ======================================================

@lru_cache(maxsize=None)
def oscillator_count(degree: int) -> int:
    """Number of rank-two Fock states at one oscillator degree, by enumeration"""
    return len(colored_multisets(degree, color_count(RANK_N)))


def _sector_sign(lattice: LatticePoint, reference: LatticePoint, graded: bool) -> int:
    if not graded:
        return 1
    difference = nf_number(lattice) - nf_number(reference)
    return -1 if difference % 2 else 1


def _full_sector(spec: ModuleSpec, sector: tuple, D: int, graded: bool, offset: Fraction) -> dict:
    lattice = spec.lattice(*sector)
    sign = _sector_sign(lattice, spec.reference(), graded)
    start = zero_mode_energy(lattice) - offset
    contributions = {}
    n = 0
    while start + n <= D:
        contributions[start + n] = contributions.get(start + n, 0) + sign * oscillator_count(n)
        n += 1
    return contributions


def _brst_sector(spec: ModuleSpec, selector: str, sector: tuple, D: int, graded: bool, offset: Fraction) -> dict:
    """sum_(l1,l2>=1) (-1)^(l1+l2) tr of the module shifted by (e1 l1, e2 l2) in one sector"""
    e1, e2 = SELECTOR_SIDES[selector]
    base = spec.lattice(*sector)
    start = zero_mode_energy(base) - offset
    c1, c2 = base.c_charges
    b1, b2 = e1 * (2 * c1 + 1), e2 * (2 * c2 + 1)
    range1 = shift_range(b1, D - start - shift_minimum(b2))
    range2 = shift_range(b2, D - start - shift_minimum(b1))
    contributions = {}
    for l1 in range1:
        for l2 in range2:
            shifted = spec.with_shifts(spec.shifts[0] + e1 * l1, spec.shifts[1] + e2 * l2)
            lattice = shifted.lattice(*sector)
            sign = (-1) ** (l1 + l2) * _sector_sign(lattice, spec.reference(), graded)
            first = zero_mode_energy(lattice) - offset
            n = 0
            while first + n <= D:
                contributions[first + n] = contributions.get(first + n, 0) + sign * oscillator_count(n)
                n += 1
    return contributions


def projector(selector: str):
    algebra = current_algebra(RANK_N)
    modes = {'eta': algebra.eta, 'xi': algebra.xi}
    return Product([modes[name](l) for name, l in SELECTOR_WORDS[selector]], label=selector)


def _projector_sector(spec: ModuleSpec, selector: str, sector: tuple, D: int, graded: bool,
                      offset: Fraction) -> dict:
    """Trace of the projector word over the sector, degree by degree"""
    P = projector(selector)
    lattice = spec.lattice(*sector)
    sign = _sector_sign(lattice, spec.reference(), graded)
    start = zero_mode_energy(lattice) - offset
    colors = color_count(RANK_N)
    contributions = {}
    n = 0
    while start + n <= D:
        trace = ZERO
        for occupation in colored_multisets(n, colors):
            state = FockState(lattice, n, occupation)
            trace += P.apply_state(state).get((state, PLAIN_KEY), ZERO)
        contributions[start + n] = qscalar(sign) * trace
        n += 1
    return contributions


def char_bruteforce(spec: ModuleSpec, selector: str = 'Full', D: int = 2, graded: bool = False,
                    method: str = 'projector', radius: int = 1, threads: int = QGLNN_THREADS) -> CharSeries:
    """
    tr q^(-d) x^h over the sectors |i|, |j|, |k| <= radius of the module, with (-1)^(N_f)
    inserted when graded. Selectors are traced either through the projector word or through
    the alternating sum over shifted modules.
    """
    if selector not in SELECTORS:
        raise UnknownModuleError(f"unknown selector {selector!r}")
    if method not in ('projector', 'brst'):
        raise UnknownModuleError(f"unknown trace method {method!r}")
    if selector != 'Full':
        spec.require_integral()
    weights = check_injective(spec, radius)
    offset = module_offset(spec)

    def job(sector):
        if selector == 'Full':
            contributions = _full_sector(spec, sector, D, graded, offset)
        elif method == 'brst':
            contributions = _brst_sector(spec, selector, sector, D, graded, offset)
        else:
            contributions = _projector_sector(spec, selector, sector, D, graded, offset)
        return weight_key(spec.lattice(*sector)), contributions

    with stopwatch() as timing:
        results = run_jobs(job, list(weights.values()), threads)
    reference = nf_number(spec.reference())
    details = {
        'module': spec.as_dict(),
        'selector': selector,
        'method': 'count' if selector == 'Full' else method,
        'radius': radius,
        'sectors': len(weights),
    }
    if graded:
        details['discarded_phase'] = fraction_str((reference - spec.reference_phase()) % 2)
    logger.info(f"📈 {selector} character of {spec.describe()} by {details['method']} through q^{D} "
                f"in {timing['ms']:.0f} ms")
    return _collect(offset, D, results, spec.reference_phase(), graded, details)


# ======================================================
# 📜 CLOSED FORMULAS
# ======================================================

@dataclass(frozen=True)
class ClosedFormula:
    """
    offset + (1/2)(l1^2 + l2^2 + e1 l1_linear l1 + e2 l2) + (1/2)(i^2 + j^2 + k^2 - 2jk
    + (1 + 2 e1 l1) i + (j_constant - 2 e1 l1) j + (k_constant + 2 e2 l2) k)
    """
    prop: str
    family: str
    j_constant: int
    k_constant: int
    x3_constant: int
    shifted: bool = True

    def offset(self, spec: ModuleSpec) -> Fraction:
        if self.family == 'F01':
            return Fraction(0)
        if self.family == 'F10':
            return spec.beta + Fraction(1, 2)
        return spec.alpha * (2 * spec.beta + 1) / 2

    def l1_linear(self, spec: ModuleSpec) -> Fraction:
        return 1 - 2 * spec.alpha if self.family == 'Falpha' else Fraction(1)

    def phase(self, spec: ModuleSpec) -> Fraction:
        if self.family == 'F01':
            return Fraction(0)
        if self.family == 'F10':
            return Fraction(1)
        return (spec.alpha - 1) % 2 if self.prop == 'falpha-full' else (1 - spec.alpha) % 2

    def weight(self, spec: ModuleSpec, i: int, j: int, k: int) -> tuple:
        b = spec.beta
        if self.family == 'F01':
            base = (Fraction(0), Fraction(0), Fraction(0), 4 * b)
        elif self.family == 'F10':
            base = (Fraction(0), Fraction(0), Fraction(self.x3_constant), 4 * b + 3)
        else:
            a = spec.alpha
            base = (a, 1 - a, Fraction(0), 4 * b + 2 - a)
        return (base[0] + j, base[1] + i - k, base[2] - j, base[3] + 2 * i - 2 * j + 2 * k)


CLOSED_FORMULAS = {
    'falpha-full': ClosedFormula('falpha-full', 'Falpha', 1, 1, 0, shifted=False),
    'f01-sub': ClosedFormula('f01-sub', 'F01', -1, 1, 0),
    'f10-sub': ClosedFormula('f10-sub', 'F10', -1, 3, 1),
    'falpha-sub': ClosedFormula('falpha-sub', 'Falpha', 1, 1, 0),
}

# the printed CCoker line of the F_((1,0);beta) formula: "(++2l_2)k" and x3^(-j)
PRINTED_TEXT = {('f10-sub', 'CCoker'): {'k_constant': 0, 'x3_constant': 0}}


def closed_formula(prop: str, selector: str, strict: bool = False) -> ClosedFormula:
    if prop not in CLOSED_FORMULAS:
        raise UnknownModuleError(f"unknown closed formula {prop!r}")
    formula = CLOSED_FORMULAS[prop]
    if strict and (prop, selector) in PRINTED_TEXT:
        formula = ClosedFormula(formula.prop, formula.family, formula.j_constant, shifted=formula.shifted,
                                **PRINTED_TEXT[(prop, selector)])
    return formula


def _closed_sector(formula: ClosedFormula, spec: ModuleSpec, sides, sector, D: int, graded: bool) -> dict:
    i, j, k = sector
    base = Fraction(i * i + j * j + k * k - 2 * j * k + i + formula.j_constant * j + formula.k_constant * k, 2)
    sign = (-1) ** (i - j + k) if graded else 1
    zero_modes = {}
    if not formula.shifted:
        zero_modes[base] = sign
    else:
        e1, e2 = sides
        b1 = e1 * (formula.l1_linear(spec) + 2 * i - 2 * j)
        b2 = e2 * (1 + 2 * k)
        for l1 in shift_range(b1, D - base - shift_minimum(b2)):
            for l2 in shift_range(b2, D - base - shift_minimum(b1)):
                exponent = base + Fraction(l1 * l1 + b1 * l1, 2) + Fraction(l2 * l2 + b2 * l2, 2)
                zero_modes[exponent] = zero_modes.get(exponent, 0) + sign * (-1) ** (l1 + l2)
    contributions = {}
    for exponent, coeff in zero_modes.items():
        n = 0
        while exponent + n <= D:
            weight = coeff * colored_partition_count(n, color_count(RANK_N))
            contributions[exponent + n] = contributions.get(exponent + n, 0) + weight
            n += 1
    return contributions


def char_closed(prop: str, spec: ModuleSpec, selector: str = None, D: int = 2, graded: bool = False,
                strict: bool = False, radius: int = 1) -> CharSeries:
    """The closed multi-sum formulas, truncated to the terms reaching q-order D over the sector box"""
    selector = selector or ('Full' if prop == 'falpha-full' else 'KKer')
    formula = closed_formula(prop, selector, strict)
    if spec.family != formula.family:
        raise UnknownModuleError(f"{prop} describes {formula.family}, not {spec.family}")
    if formula.shifted == (selector == 'Full'):
        raise UnknownModuleError(f"{prop} has no {selector} formula")
    if formula.shifted:
        spec.require_integral()
    offset = formula.offset(spec)
    sides = SELECTOR_SIDES.get(selector)
    results = [(formula.weight(spec, *sector), _closed_sector(formula, spec, sides, sector, D, graded))
               for sector in sector_box(radius)]
    details = {'prop': prop, 'selector': selector, 'strict': strict, 'module': spec.as_dict(), 'radius': radius}
    return _collect(offset, D, results, formula.phase(spec), graded, details)


# ======================================================
# ⚖️ COMPARISONS
# ======================================================

def compare_characters(name: str, parameters: dict, lhs: CharSeries, rhs: CharSeries,
                       common_only: bool = False) -> RelationReport:
    """Sector by sector equality on absolute q-exponents inside both windows"""
    report = RelationReport(name, parameters)
    if lhs.graded and (lhs.global_phase - rhs.global_phase) % 2:
        report.record_failure(f"global phase {lhs.global_phase} != {rhs.global_phase}")
    shift = lhs.global_q_offset - rhs.global_q_offset
    if shift.denominator != 1:
        report.record_failure(f"offsets {lhs.global_q_offset} and {rhs.global_q_offset} differ by {shift}")
        return report
    # rhs exponent e sits at e - shift relative to the lhs offset
    top = min(lhs.max_q_order, rhs.max_q_order - shift)
    keys = lhs.window & rhs.window if common_only else set(lhs.terms) | set(rhs.terms)
    for key in sorted(keys):
        left, right = lhs.sector(key), rhs.sector(key)
        exponents = {e for e in left.terms if e <= top} | {e - shift for e in right.terms if e - shift <= top}
        for exponent in sorted(exponents):
            report.checked_dim += 1
            a = left.coefficient(exponent)
            b = right.coefficient(exponent + shift)
            if a != b:
                report.record_failure(f"x^{[str(x) for x in key]} q^{lhs.global_q_offset + exponent}: {a} != {b}")
    report.truncation_guard = int(top)
    report.details['sectors'] = len(keys)
    return report


def verify_characters(spec: ModuleSpec, selector: str = 'Full', D: int = 2, graded: bool = False,
                      radius: int = 1, prop: str = None, strict: bool = False,
                      threads: int = QGLNN_THREADS) -> list:
    """Every available path for one character, compared pairwise against the first"""
    params = {'module': spec.describe(), 'selector': selector, 'D': D, 'graded': graded}
    if selector == 'Full':
        reference = char_bruteforce(spec, 'Full', D, graded, radius=radius, threads=threads)
        others = {}
    else:
        reference = char_bruteforce(spec, selector, D, graded, 'projector', radius, threads)
        others = {'brst': char_bruteforce(spec, selector, D, graded, 'brst', radius, threads)}
    if prop:
        others['closed'] = char_closed(prop, spec, selector, D, graded, strict, radius)
    reports = []
    for method, series in others.items():
        report = compare_characters('char', {**params, 'paths': f"{reference.details['method']}={method}"},
                                    reference, series)
        if method == 'closed' and (prop, selector) in PRINTED_TEXT:
            alternative = char_closed(prop, spec, selector, D, graded, not strict, radius)
            check = compare_characters('char', params, reference, alternative)
            key = 'pattern_matches' if strict else 'printed_text_matches'
            report.details[key] = check.passed
            report.details['strict'] = strict
        reports.append(report)
    return reports


def corollary_check(family: str, beta, D: int = 2, graded: bool = False, alpha=None,
                    radius: int = 1) -> RelationReport:
    """CCoker of the beta+1 module and KKer of the beta module have the same character"""
    lower = ModuleSpec(family, beta, alpha)
    upper = ModuleSpec(family, lower.beta + 1, alpha)
    lhs = char_bruteforce(upper, 'CCoker', D, graded, 'brst', radius)
    rhs = char_bruteforce(lower, 'KKer', D, graded, 'brst', radius)
    report = compare_characters('corollary', {'family': family, 'beta': str(lower.beta), 'graded': graded},
                                lhs, rhs, common_only=True)
    if not report.checked_dim:
        report.record_failure("no common weight sectors in the window")
    logger.info(f"{'✅' if report.passed else '❌'} CCoker(beta+1) = KKer(beta) on {family}: "
                f"{report.checked_dim} coefficients")
    return report
