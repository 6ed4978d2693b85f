#!/usr/bin/env python3
"""
qglnn - exact verification engine for the level-one bosonization of U_q[gl(N|N)^]
Main entry point
"""
import argparse
import sys
from pathlib import Path

from config import OUTPUT_FORMATS, RunConfig, setup_logging
from core.characters import METHODS, PROPS
from core.errors import QglnnError
from core.gl22 import FAMILIES, SELECTORS
from core.utils import parse_fraction
from handlers.commands import VERIFY_SUITES, dispatch
from i18n.translations import set_language, t
from ui.messages import render

# Setup logging
logger = setup_logging()

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--rank', type=int, help="N of gl(N|N) (default: QGLNN_RANK)")
    common.add_argument('--degree', type=int, help="oscillator degree D of the truncated bases")
    common.add_argument('--modes', type=int, help="mode window |n| <= M of the current relations")
    common.add_argument('--order', type=int, help="q-order of characters and series order of the oracle")
    common.add_argument('--radius', type=int,
                        help="current applications spanning the lattice window (default: QGLNN_RADIUS)")
    common.add_argument('--window', type=int,
                        help="intermediate depth of the fz coefficient checks (default: --degree)")
    common.add_argument('--threads', type=int, help="worker threads (default: QGLNN_THREADS)")
    common.add_argument('--output', choices=OUTPUT_FORMATS, help="report format")
    common.add_argument('--out', help="write the report to this file instead of stdout")
    common.add_argument('--lang', help="language of the pretty report (en, it)")
    common.add_argument('--family', choices=FAMILIES)
    common.add_argument('--alpha', type=parse_fraction, help="alpha of F_(alpha;beta), e.g. 1/2")
    common.add_argument('--beta', type=parse_fraction, help="beta of the module, e.g. 1/3")
    common.add_argument('--selector', choices=SELECTORS)
    common.add_argument('--method', choices=METHODS)
    common.add_argument('--prop', choices=PROPS, help="closed formula to compare against")
    common.add_argument('--pair', help="exchange pair for fz, or 'A,B' field symbols for the oracle")
    common.add_argument('--specA', dest='specA',
                        help="outer field symbol of the oracle two-point function, e.g. 'H1;1/2'")
    common.add_argument('--specB', dest='specB', help="inner field symbol of the oracle two-point function")
    common.add_argument('--super', dest='graded', action='store_const', const=True,
                        help="supercharacter: insert (-1)^(N_f)")
    common.add_argument('--strict-printed-text', '--strict-paper-text', dest='strict_printed_text',
                        action='store_const', const=True,
                        help="use the printed CCoker line of the F_((1,0);beta) formula verbatim")
    common.add_argument('--mutate', action='store_const', const=True,
                        help="break one R-matrix sign or one cocycle so the checks must fail")

    parser = argparse.ArgumentParser(prog='qglnn', description="Exact checks of the U_q[gl(N|N)^] bosonization.")
    commands = parser.add_subparsers(dest='command', required=True)
    verify = commands.add_parser('verify', parents=[common], help="run a verification suite")
    verify.add_argument('suite', choices=VERIFY_SUITES)
    commands.add_parser('char', parents=[common], help="compute a character or supercharacter")
    oracle = commands.add_parser('oracle', parents=[common], help="cross-check against the contraction table")
    oracle.add_argument('suite', choices=('two-point',))
    commands.add_parser('selftest', parents=[common], help="small instance of every suite")
    return parser


def run(argv=None) -> int:
    """Parses argv, runs one subcommand and returns the exit code"""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help exits 0, usage errors exit 2
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        config = RunConfig.from_args(args)
        set_language(config.lang)
        result = dispatch(config)
    except QglnnError as e:
        logger.error(t('run.usage_error', error=e))
        return EXIT_USAGE

    text = render(result, config.output, config)
    if config.out:
        Path(config.out).write_text(text + '\n', encoding='utf-8')
        logger.info(t('run.written', path=config.out))
    else:
        print(text)

    if not result.passed:
        failed = sum(1 for r in result.reports if not r.passed)
        logger.warning(t('run.summary_failed', failed=failed, total=len(result.reports)))
        return EXIT_FAILED
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
