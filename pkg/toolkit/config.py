"""
Run configuration
Flags override environment variables (or a .env file), which override defaults.
"""

import logging
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

import mpmath
from dotenv import load_dotenv

from errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_SEED = 0
DEFAULT_SAMPLES = 1000
DEFAULT_PRECISION_BITS = 128
DEFAULT_CAPACITY = 10_000_000
DEFAULT_WORKERS = 1
OUTPUT_FORMATS = ('table', 'csv')
SIGNIFICANT_DIGITS = 12

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    precision_bits: int = DEFAULT_PRECISION_BITS
    output_format: str = 'table'
    capacity: int = DEFAULT_CAPACITY
    workers: int = DEFAULT_WORKERS
    log_level: str = 'INFO'

    def __post_init__(self):
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.samples < 1:
            raise ConfigError(f"samples must be positive, got {self.samples}")
        if self.precision_bits < 53:
            raise ConfigError(f"precision must be at least 53 bits, got {self.precision_bits}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        if self.capacity < 1:
            raise ConfigError(f"capacity must be positive, got {self.capacity}")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        if not isinstance(logging.getLevelName(self.log_level.upper()), int):
            raise ConfigError(f"unknown log level {self.log_level!r}")

    def with_overrides(self, **overrides) -> 'RunConfig':
        """Return a copy with every non-None override applied"""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None


def load_config(dotenv_path: Optional[str] = None) -> RunConfig:
    """Build a RunConfig from the environment (and .env when present)"""
    load_dotenv(dotenv_path)
    return RunConfig(
        seed=_env_int('HURWITZ_SEED', DEFAULT_SEED),
        samples=_env_int('HURWITZ_SAMPLES', DEFAULT_SAMPLES),
        precision_bits=_env_int('HURWITZ_PREC', DEFAULT_PRECISION_BITS),
        output_format=os.getenv('HURWITZ_FORMAT', 'table'),
        capacity=_env_int('HURWITZ_CAPACITY', DEFAULT_CAPACITY),
        workers=_env_int('HURWITZ_WORKERS', DEFAULT_WORKERS),
        log_level=os.getenv('HURWITZ_LOG_LEVEL', 'INFO').upper(),
    )


def configure_precision(bits: int = DEFAULT_PRECISION_BITS) -> None:
    """Set the working precision of every mpf computation"""
    mpmath.mp.prec = bits
    logger.debug("extended precision set to %d bits", bits)


def tolerance():
    """Relative tolerance for approximate equalities"""
    return mpmath.mpf(2) ** -40


def prefilter_slack():
    """Relative slack of the floating enumeration prefilter"""
    return 2.0 ** -30


def to_mpf(value) -> mpmath.mpf:
    """Convert an int, Fraction, float, str or mpf to an mpf at working precision"""
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def to_fraction(value) -> Fraction:
    """Exact rational value of an mpf (mpf values are dyadic rationals)"""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    value = mpmath.mpf(value)
    if not mpmath.isfinite(value):
        raise ValueError(f"cannot convert {value} to a rational")
    if value == 0:
        return Fraction(0)
    # man_exp drops the sign
    sign, man, exp, _ = value._mpf_
    return (-1) ** sign * Fraction(int(man)) * Fraction(2) ** int(exp)


def fmt(value) -> str:
    """Format a real with the report precision"""
    return mpmath.nstr(to_mpf(value), SIGNIFICANT_DIGITS)
