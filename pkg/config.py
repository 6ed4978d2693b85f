"""
Centralized configuration for qglnn
"""
import os
import logging
from dataclasses import dataclass, asdict
from fractions import Fraction

from core.errors import ConfigError

# Worker pool
QGLNN_THREADS = int(os.environ.get('QGLNN_THREADS', '1'))

# Default run parameters
QGLNN_RANK = int(os.environ.get('QGLNN_RANK', '2'))
QGLNN_DEGREE = int(os.environ.get('QGLNN_DEGREE', '3'))
QGLNN_MODES = int(os.environ.get('QGLNN_MODES', '1'))
QGLNN_ORDER = int(os.environ.get('QGLNN_ORDER', '4'))
# Current applications from the origin that span the lattice window of the relation checks
QGLNN_RADIUS = int(os.environ.get('QGLNN_RADIUS', '2'))

# Output
# Options: 'pretty', 'json', 'csv'
QGLNN_OUTPUT = os.environ.get('QGLNN_OUTPUT', 'pretty')
OUTPUT_FORMATS = ('pretty', 'json', 'csv')
SCHEMA_VERSION = '1'

# Upper bound on source states visited by one relation job
CHECKED_FOCK_STATES_LIMIT = int(os.environ.get('CHECKED_FOCK_STATES_LIMIT', '400'))

# Internationalization Configuration
LANGUAGE = os.environ.get('LANGUAGE', 'en')

# Logging Configuration
LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')


def setup_logging():
    """Configures logging for the application"""
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    # sympy's cache warnings are not ours
    logging.getLogger('sympy').setLevel(logging.WARNING)

    return logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """One command-line run: parsed flags layered over the environment defaults"""
    command: str
    suite: str = None
    rank: int = QGLNN_RANK
    degree: int = QGLNN_DEGREE
    modes: int = QGLNN_MODES
    order: int = QGLNN_ORDER
    radius: int = QGLNN_RADIUS
    threads: int = QGLNN_THREADS
    output: str = QGLNN_OUTPUT
    out: str = None
    lang: str = LANGUAGE
    family: str = 'F01'
    alpha: Fraction = None
    beta: Fraction = Fraction(0)
    selector: str = 'Full'
    method: str = 'bruteforce'
    prop: str = None
    pair: str = None
    specA: str = None
    specB: str = None
    window: int = None
    graded: bool = False
    strict_printed_text: bool = False
    mutate: bool = False

    def __post_init__(self):
        if self.rank < 1:
            raise ConfigError(f"--rank must be at least 1, got {self.rank}")
        if self.degree < 0 or self.order < 0 or self.radius < 0:
            raise ConfigError("--degree, --order and --radius must be nonnegative")
        if self.modes < 0:
            raise ConfigError(f"--modes must be nonnegative, got {self.modes}")
        if self.window is not None and self.window < 0:
            raise ConfigError(f"--window must be nonnegative, got {self.window}")
        if self.threads < 1:
            raise ConfigError(f"--threads must be at least 1, got {self.threads}")
        if self.output not in OUTPUT_FORMATS:
            raise ConfigError(f"unknown output format {self.output!r}")

    @classmethod
    def from_args(cls, args) -> 'RunConfig':
        """Flags left unset on the command line keep their environment defaults"""
        values = {k: v for k, v in vars(args).items() if v is not None and k in cls.__dataclass_fields__}
        return cls(**values)

    def as_dict(self) -> dict:
        data = asdict(self)
        for key in ('alpha', 'beta'):
            if data[key] is not None:
                data[key] = str(data[key])
        return data
