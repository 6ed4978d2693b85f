"""
Handlers for the command-line subcommands
"""
from dataclasses import dataclass, field
from fractions import Fraction

from config import RunConfig, setup_logging
from core.characters import char_bruteforce, char_closed, corollary_check, verify_characters
from core.currents import verify_chevalley, verify_drinfeld, verify_eta_compatibility
from core.errors import ConfigError, UnknownModuleError
from core.evaluation import verify_evaluation
from core.gl22 import (
    ModuleSpec, brst_verify, verify_derivation, verify_eta_xi, verify_highest_weight, verify_module_identity,
    verify_vertex_homomorphisms,
)
from core.ope_oracle import crosscheck_table, crosscheck_two_point, parse_symbol, table_pairs
from core.rmatrix import build_rmatrix, check_conservation, check_gybe, check_initial_condition, \
    check_unitarity_crossing
from core.vertexops import FZ_PAIRS, ExchangeWindow, miki_and_rs, verify_vertex_brackets, verify_fz, verify_nf_parity

logger = setup_logging()

# the entry flipped by --mutate on the R-matrix suites
MUTATED_ENTRY = (2, 1, 1, 2)
# the F^(+,i) cocycle dropped by --mutate on the current suites
MUTATED_COCYCLE = 3


@dataclass
class CommandResult:
    command: str
    reports: list = field(default_factory=list)
    characters: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def module_spec(config: RunConfig) -> ModuleSpec:
    alpha = config.alpha if config.family == 'Falpha' else None
    return ModuleSpec(config.family, config.beta, alpha)


def _dropped_cocycle(config: RunConfig):
    if not config.mutate:
        return None
    return (1, min(MUTATED_COCYCLE, 2 * config.rank - 1))


def _window_depth(config: RunConfig) -> int:
    if config.window is None:
        return config.degree
    if config.window > config.degree:
        raise ConfigError(f"--window {config.window} exceeds --degree {config.degree}")
    return config.window


# ======================================================
# 🔺 R-MATRIX
# ======================================================

def verify_ybe(config: RunConfig) -> CommandResult:
    R = build_rmatrix(config.rank, mutate={MUTATED_ENTRY} if config.mutate else None)
    reports = [check_gybe(config.rank, R), check_initial_condition(config.rank, R), check_conservation(R)]
    return CommandResult('verify ybe', reports)


def verify_unitarity(config: RunConfig) -> CommandResult:
    R = build_rmatrix(config.rank, mutate={MUTATED_ENTRY} if config.mutate else None)
    return CommandResult('verify unitarity', check_unitarity_crossing(config.rank, R))


# ======================================================
# 🔬 CURRENTS
# ======================================================

def verify_drinfeld_suite(config: RunConfig) -> CommandResult:
    reports = verify_drinfeld(config.rank, config.degree, config.modes, radius=config.radius, threads=config.threads,
                              drop_cocycle=_dropped_cocycle(config))
    reports += verify_eta_compatibility(config.rank, config.degree, config.modes, threads=config.threads)
    return CommandResult('verify drinfeld', reports)


def verify_chevalley_suite(config: RunConfig) -> CommandResult:
    reports = verify_chevalley(config.rank, config.degree, radius=config.radius, threads=config.threads,
                               drop_cocycle=_dropped_cocycle(config))
    return CommandResult('verify chevalley', reports)


def verify_evaluation_suite(config: RunConfig) -> CommandResult:
    reports = []
    for dual in (False, True):
        reports += verify_evaluation(config.rank, dual, config.modes, config.threads)
    return CommandResult('verify evaluation', reports)


# ======================================================
# 🔀 VERTEX OPERATORS
# ======================================================

def verify_vertex_brackets_suite(config: RunConfig) -> CommandResult:
    reports = verify_vertex_brackets(config.rank, config.degree, radius=config.radius, threads=config.threads)
    reports += verify_nf_parity(config.rank, config.degree, radius=config.radius)
    return CommandResult('verify vertex-brackets', reports)


def verify_fz_suite(config: RunConfig) -> CommandResult:
    pairs = FZ_PAIRS
    if config.pair:
        if config.pair not in FZ_PAIRS:
            raise ConfigError(f"--pair must be one of {', '.join(FZ_PAIRS)} for verify fz")
        pairs = (config.pair,)
    window = ExchangeWindow(depth=_window_depth(config))
    reports = [verify_fz(pair, config.rank, config.degree, window, flip_sign=config.mutate) for pair in pairs]
    return CommandResult('verify fz', reports)


def verify_rs_suite(config: RunConfig) -> CommandResult:
    report = miki_and_rs(config.rank, config.degree, ExchangeWindow(depth=_window_depth(config)))
    return CommandResult('verify rs', [report])


# ======================================================
# 🧮 RANK-TWO MODULES
# ======================================================

def verify_brst_suite(config: RunConfig) -> CommandResult:
    spec = module_spec(config)
    reports = verify_eta_xi(spec, min(config.degree, 1))
    for i in (1, 2):
        for l in (-1, 0, 1):
            reports.append(brst_verify(spec, i, l, config.degree))
    return CommandResult('verify brst', reports)


def verify_modules_suite(config: RunConfig) -> CommandResult:
    spec = module_spec(config)
    reports = verify_derivation(spec, config.degree, config.modes, threads=config.threads)
    reports.append(verify_module_identity(spec.family, spec.beta, spec.alpha))
    if spec.family == 'Falpha' and spec.integral:
        reports += verify_vertex_homomorphisms(spec.alpha, spec.beta)
    return CommandResult('verify modules', reports)


def verify_highest_weight_suite(config: RunConfig) -> CommandResult:
    return CommandResult('verify highest-weight', verify_highest_weight(config.beta, config.alpha))


def verify_corollary_suite(config: RunConfig) -> CommandResult:
    alpha = config.alpha if config.family == 'Falpha' else None
    reports = [corollary_check(config.family, config.beta, config.order, graded, alpha)
               for graded in sorted({False, config.graded})]
    return CommandResult('verify corollary', reports)


def char(config: RunConfig) -> CommandResult:
    """
    One character or supercharacter. With --prop the other computation paths are
    compared against it as well.
    """
    spec = module_spec(config)
    D = config.order
    if config.method == 'closed':
        if not config.prop:
            raise ConfigError("--method closed needs --prop")
        series = char_closed(config.prop, spec, config.selector, D, config.graded, config.strict_printed_text)
    else:
        method = 'projector' if config.method == 'bruteforce' else config.method
        series = char_bruteforce(spec, config.selector, D, config.graded, method, threads=config.threads)
    reports = []
    if config.prop:
        reports = verify_characters(spec, config.selector, D, config.graded, prop=config.prop,
                                    strict=config.strict_printed_text, threads=config.threads)
    return CommandResult('char', reports, [series])


# ======================================================
# 🔁 ORACLE
# ======================================================

def oracle_two_point(config: RunConfig) -> CommandResult:
    if config.specA or config.specB:
        if not (config.specA and config.specB):
            raise ConfigError("--specA and --specB go together")
        if config.pair:
            raise ConfigError("give either --pair or --specA/--specB, not both")
        names = [config.specA, config.specB]
    elif config.pair:
        names = config.pair.split(',')
        if len(names) != 2:
            raise ConfigError("--pair takes two field symbols separated by a comma, e.g. 'H1;1/2,H*2'")
    else:
        names = None
    if names:
        A, B = (parse_symbol(name) for name in names)
        reports = [crosscheck_two_point(A, B, config.rank, config.order)]
    else:
        reports = crosscheck_table(config.rank, config.order)
    return CommandResult('oracle two-point', reports)


# ======================================================
# 🩺 SELFTEST
# ======================================================

def selftest(config: RunConfig) -> CommandResult:
    """Small instances of every suite, quick enough for a smoke run"""
    logger.info("🩺 Running selftest")
    reports = [check_gybe(1), check_initial_condition(1), check_conservation(build_rmatrix(1))]
    reports += check_unitarity_crossing(1)
    reports += verify_evaluation(1)
    reports += verify_drinfeld(1, 1, 1, threads=config.threads)
    reports += verify_chevalley(1, 1, threads=config.threads)
    reports += verify_nf_parity(1, 1)
    A, B = table_pairs(1)[0]
    reports.append(crosscheck_two_point(A, B, 1, 1))
    reports += verify_highest_weight(0, 1)
    reports.append(verify_module_identity('F01', 0))
    reports.append(brst_verify(ModuleSpec('F01', 0), 1, 0, 1))
    reports += verify_characters(ModuleSpec('Falpha', 0, Fraction(1, 2)), 'Full', 2, prop='falpha-full', radius=0)
    reports.append(corollary_check('F01', 0, 1))
    return CommandResult('selftest', reports)


COMMANDS = {
    ('verify', 'ybe'): verify_ybe,
    ('verify', 'unitarity'): verify_unitarity,
    ('verify', 'drinfeld'): verify_drinfeld_suite,
    ('verify', 'chevalley'): verify_chevalley_suite,
    ('verify', 'evaluation'): verify_evaluation_suite,
    ('verify', 'vertex-brackets'): verify_vertex_brackets_suite,
    ('verify', 'appendix-b'): verify_vertex_brackets_suite,
    ('verify', 'fz'): verify_fz_suite,
    ('verify', 'rs'): verify_rs_suite,
    ('verify', 'brst'): verify_brst_suite,
    ('verify', 'modules'): verify_modules_suite,
    ('verify', 'highest-weight'): verify_highest_weight_suite,
    ('verify', 'corollary'): verify_corollary_suite,
    ('char', None): char,
    ('oracle', 'two-point'): oracle_two_point,
    ('selftest', None): selftest,
}

VERIFY_SUITES = tuple(suite for command, suite in COMMANDS if command == 'verify')


def dispatch(config: RunConfig) -> CommandResult:
    handler = COMMANDS.get((config.command, config.suite))
    if handler is None:
        raise UnknownModuleError(f"no handler for {config.command} {config.suite or ''}".strip())
    logger.info(f"▶️ {config.command} {config.suite or ''} N={config.rank} D={config.degree}")
    return handler(config)
