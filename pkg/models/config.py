"""Run configuration for the command-line front end."""
import hashlib
import json
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from utils.validation import validate_expression, validate_level_count, validate_output_path

# Defaults
DEFAULT_LEVELS = 200
DEFAULT_GRID_1D = 1025
DEFAULT_GRID_2D = 257
DEFAULT_DOMAIN = f"grid1d:0:3:{DEFAULT_GRID_1D}"
DEFAULT_COEFFS = "harmonic"
DEFAULT_DEFECT_THRESHOLD = 1e-9
DEFAULT_PIECE_CAP = 10 ** 6
DEFAULT_CROSS_VALIDATION_SAMPLES = 10 ** 4
DEFAULT_SEED = 0
DEFAULT_WORKERS = 1
DEFAULT_HORIZON = 100
DEFAULT_EPSILONS = (0.1, 0.01, 0.001)
DEFAULT_DYADIC_LEVELS = "1..12"
MAX_EXPRESSION_LENGTH = 4096

# fields that never change artifacts and stay out of the config echo
_NON_ECHO_FIELDS = {"workers", "out_json", "out_csv", "out_md", "out_dir", "record_time", "verbose", "log_file"}


class Subcommand(str, Enum):
    """CLI subcommands."""
    DECOMPOSE = "decompose"
    AUDIT = "audit"
    COMPARE = "compare"
    SMOOTH = "smooth"
    VALIDATE_SEQ = "validate-seq"


def parse_level_list(text: str) -> List[int]:
    """
    Parse "1..12", "1,2,5" or a mix such as "1..3,8" into sorted unique levels.

    Raises:
        ValueError: for malformed items or negative levels
    """
    levels = set()
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ".." in item:
            start, _, stop = item.partition("..")
            first, last = int(start), int(stop)
            if last < first:
                raise ValueError(f"empty level range {item!r}")
            levels.update(range(first, last + 1))
        else:
            levels.add(int(item))
    if any(level < 0 for level in levels):
        raise ValueError("levels must be nonnegative")
    return sorted(levels)


class RunConfig(BaseModel):
    """Validated configuration of one CLI run."""
    command: Subcommand
    fn: Optional[str] = None
    domain: str = DEFAULT_DOMAIN
    coeffs: str = DEFAULT_COEFFS
    levels: int = DEFAULT_LEVELS
    vmax: Optional[str] = None
    eps: List[float] = Field(default_factory=lambda: list(DEFAULT_EPSILONS))
    masks: List[int] = Field(default_factory=list)
    dyadic_levels: List[int] = Field(default_factory=lambda: parse_level_list(DEFAULT_DYADIC_LEVELS))
    horizon: int = DEFAULT_HORIZON
    samples: int = Field(default=DEFAULT_CROSS_VALIDATION_SAMPLES, ge=0)
    radius: Optional[str] = None
    seed: int = DEFAULT_SEED
    workers: int = Field(default=DEFAULT_WORKERS, ge=1)
    out_json: Optional[str] = None
    out_csv: Optional[str] = None
    out_md: Optional[str] = None
    out_dir: Optional[str] = None
    record_time: bool = False
    verbose: bool = False
    log_file: Optional[str] = None

    @field_validator('fn')
    @classmethod
    def validate_fn(cls, v: Optional[str]) -> Optional[str]:
        """Expressions are nonempty ASCII and at most MAX_EXPRESSION_LENGTH characters."""
        if v is None:
            return v
        ok, message = validate_expression(v, MAX_EXPRESSION_LENGTH)
        if not ok:
            raise ValueError(message)
        return v

    @field_validator('levels', 'horizon')
    @classmethod
    def validate_counts(cls, v: int) -> int:
        """Level counts and horizons are at least 1."""
        ok, message = validate_level_count(v)
        if not ok:
            raise ValueError(message)
        return v

    @field_validator('out_json', 'out_csv', 'out_md', 'log_file')
    @classmethod
    def validate_paths(cls, v: Optional[str], info) -> Optional[str]:
        """Output paths must be writable."""
        if v is None or v == "-":
            return v
        ok, message = validate_output_path(v, info.field_name)
        if not ok:
            raise ValueError(message)
        return v

    @field_validator('masks', 'dyadic_levels', mode='before')
    @classmethod
    def validate_level_lists(cls, v: Any) -> List[int]:
        """Accept "1..12" and comma lists as well as plain lists."""
        if isinstance(v, str):
            return parse_level_list(v)
        return sorted(set(int(x) for x in v or []))

    @field_validator('masks')
    @classmethod
    def validate_mask_levels(cls, v: List[int]) -> List[int]:
        """Mask levels start at 1."""
        if any(level < 1 for level in v):
            raise ValueError("mask levels start at 1")
        return v

    @field_validator('eps', mode='before')
    @classmethod
    def validate_eps(cls, v: Any) -> List[float]:
        """The eps table always contains the default tolerances."""
        if isinstance(v, str):
            v = [float(x) for x in v.split(",") if x.strip()]
        values = set(DEFAULT_EPSILONS) | {float(x) for x in v or []}
        if any(x <= 0 for x in values):
            raise ValueError("tolerances must be positive")
        return sorted(values, reverse=True)

    def config_echo(self) -> Dict[str, Any]:
        """Configuration as echoed into artifacts (no worker count, no output paths)."""
        echo = self.model_dump(mode="json", exclude=_NON_ECHO_FIELDS)
        return {key: value for key, value in echo.items() if value is not None}

    def trace_id(self) -> str:
        """Deterministic trace id: identical configs share log correlation ids."""
        payload = json.dumps(self.config_echo(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:8]
