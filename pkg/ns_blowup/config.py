"""Configuration management for NS Blowup.

Process settings come from the environment (.env supported); experiment
parameters come from INI files loaded into ExperimentConfig.
"""

import configparser
import math
import os
from dataclasses import dataclass, fields, replace
from typing import Dict, Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class ConfigError(ValueError):
    """Raised for invalid or unknown configuration values."""


_THREADS_STR = os.getenv('NS_BLOWUP_THREADS', '1')
try:
    FFT_WORKERS = int(_THREADS_STR)
except ValueError:
    raise ConfigError("NS_BLOWUP_THREADS must be an integer")
if FFT_WORKERS == 0 or FFT_WORKERS < -1:
    raise ConfigError("NS_BLOWUP_THREADS must be >= 1 (or -1 for all cores)")

# Numerical defaults
DEFAULT_BOX_LENGTH = 2 * math.pi
DEFAULT_DT = 1e-2
DEFAULT_PICARD_TOL = 1e-10
DEFAULT_PICARD_MAX_ITER = 50
DEFAULT_EPSILON3 = 0.1  # calibrated on a random ensemble at n=32, see DESIGN.md

# Kato quantity sampling: log-spaced over KATO_DECADES decades below T
KATO_SAMPLES_PER_DECADE = 64
KATO_DECADES = 4
DEFAULT_KATO_SAMPLES = KATO_SAMPLES_PER_DECADE * KATO_DECADES + 1

# Dyadic horizon search over T = 2^0 ... 2^-HORIZON_MIN_EXPONENT
HORIZON_MIN_EXPONENT = 20

# Oseen kernel quadrature: spacing at most OSEEN_SPACING_FACTOR * sqrt(2t),
# refining the grid by powers of two up to OSEEN_MAX_POINTS per axis
OSEEN_SPACING_FACTOR = 0.6
OSEEN_MAX_POINTS = 256

# Output settings
CSV_FLOAT_FORMAT = '.17g'
FIELDS_DIR = "fields"
SERIES_FILE = "series.csv"
CONFIG_FILE = "config.ini"
MANIFEST_FILE = "manifest.csv"


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one `simulate` run.

    Mirrors the INI layout section by section; defaults are the module
    constants above.
    """

    # [grid]
    n: int = 32
    box_length: float = DEFAULT_BOX_LENGTH
    # [initial]
    condition: str = "taylor-green"
    amplitude: float = 1.0
    path: Optional[str] = None
    # [time]
    T: float = 0.1
    dt: float = DEFAULT_DT
    # [solver]
    picard_tol: float = DEFAULT_PICARD_TOL
    picard_max_iter: int = DEFAULT_PICARD_MAX_ITER
    epsilon3: float = DEFAULT_EPSILON3
    dealias: bool = True
    # [monitor]
    omega: str = "zero"
    window: float = 0.05
    kato_T: float = 1.0
    kato_samples: int = DEFAULT_KATO_SAMPLES
    bv_epsilon: float = 0.1
    reference: Optional[str] = None
    # [run]
    seed: int = 0
    output: str = "runs/simulation"

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Check every numeric parameter against its documented range."""
        if self.n < 8 or self.n & (self.n - 1):
            raise ConfigError(f"grid.n must be a power of two >= 8, got {self.n}")
        if not self.box_length > 0:
            raise ConfigError(f"grid.box_length must be positive, got {self.box_length}")
        if not self.T > 0:
            raise ConfigError(f"time.T must be positive, got {self.T}")
        if not 0 < self.dt <= self.T:
            raise ConfigError(f"time.dt must be in (0, T], got {self.dt}")
        if abs(round(self.T / self.dt) * self.dt - self.T) > 1e-9 * self.T:
            raise ConfigError(f"time.T={self.T} is not a multiple of time.dt={self.dt}")
        if not self.picard_tol > 0:
            raise ConfigError(f"solver.picard_tol must be positive, got {self.picard_tol}")
        if self.picard_max_iter < 1:
            raise ConfigError(f"solver.picard_max_iter must be >= 1, got {self.picard_max_iter}")
        if not self.epsilon3 > 0:
            raise ConfigError(f"solver.epsilon3 must be positive, got {self.epsilon3}")
        if not self.window >= 0:
            raise ConfigError(f"monitor.window must be >= 0, got {self.window}")
        if not 0 < self.kato_T <= 1:
            raise ConfigError(f"monitor.kato_T must be in (0, 1], got {self.kato_T}")
        if self.kato_samples < 8:
            raise ConfigError(f"monitor.kato_samples must be >= 8, got {self.kato_samples}")
        if not self.bv_epsilon > 0:
            raise ConfigError(f"monitor.bv_epsilon must be positive, got {self.bv_epsilon}")
        if self.seed < 0:
            raise ConfigError(f"run.seed must be >= 0, got {self.seed}")

    def with_overrides(self, **changes):
        """Return a copy with some parameters replaced (validated again)."""
        return replace(self, **changes)

    def to_ini(self):
        """Render the effective configuration as INI text."""
        parser = configparser.ConfigParser()
        parser.optionxform = str
        for section, keys in _SECTIONS.items():
            parser[section] = {}
            for key in keys:
                value = getattr(self, key)
                if value is None:
                    continue
                if isinstance(value, float):
                    value = format(value, CSV_FLOAT_FORMAT)
                parser[section][key] = str(value)
        lines = []
        for section in parser.sections():
            lines.append(f"[{section}]")
            for key, value in parser[section].items():
                lines.append(f"{key} = {value}")
            lines.append("")
        return "\n".join(lines)


_SECTIONS: Dict[str, tuple] = {
    'grid': ('n', 'box_length'),
    'initial': ('condition', 'amplitude', 'path'),
    'time': ('T', 'dt'),
    'solver': ('picard_tol', 'picard_max_iter', 'epsilon3', 'dealias'),
    'monitor': ('omega', 'window', 'kato_T', 'kato_samples', 'bv_epsilon', 'reference'),
    'run': ('seed', 'output'),
}


def _convert(name, raw, target_type):
    """Convert a raw INI string to the field's type."""
    try:
        if target_type is bool:
            lowered = raw.strip().lower()
            if lowered in ('1', 'true', 'yes', 'on'):
                return True
            if lowered in ('0', 'false', 'no', 'off'):
                return False
            raise ValueError(raw)
        if target_type is int:
            return int(raw)
        if target_type is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError(raw)
            return value
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {target_type.__name__}")


def parse_config_text(text, source="<string>"):
    """Parse INI text into an ExperimentConfig.

    Args:
        text: INI document
        source: Name used in error messages

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: Unknown section/key, unparsable or out-of-range value
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep key case ('T')
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}")

    types = {f.name: f.type for f in fields(ExperimentConfig)}
    type_map = {int: int, float: float, bool: bool, str: str, Optional[str]: str}

    values = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser[section].items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
            target = type_map.get(types[key], str)
            values[key] = _convert(f"{section}.{key}", raw, target)

    try:
        return ExperimentConfig(**values)
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}")


def load_config(path):
    """Load an ExperimentConfig from an INI file.

    Args:
        path: Path to the INI file

    Returns:
        ExperimentConfig
    """
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    return parse_config_text(text, source=str(path))


def worker_count():
    """Number of threads for sample-parallel probes (NS_BLOWUP_THREADS, -1 = all cores)."""
    if FFT_WORKERS == -1:
        return os.cpu_count() or 1
    return FFT_WORKERS
