"""Configuration handling for sleepcomb.

Library-wide limits (enumeration caps, sampling budgets, tolerances) live in a
single ``SleepcombConfig``. It can be built programmatically, from a YAML file,
or from a dictionary, and ``SLEEPCOMB_ENUM_CAP`` overrides the enumeration cap.

Example:
    >>> config = SleepcombConfig(enum_cap=5000)
    >>> config.enum_cap
    5000
"""

import os
from typing import Optional

import yaml

from sleepcomb.errors import InvalidInstance
from sleepcomb.logging import get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_FILE = "sleepcomb.yaml"
ENUM_CAP_ENV = "SLEEPCOMB_ENUM_CAP"

DEFAULT_ENUM_CAP = 100_000
DEFAULT_PERMUTATION_CAP = 8
DEFAULT_TOLERANCE = 1e-9


class SleepcombConfig:
    """Limits and defaults used across the library.

    Attributes:
        enum_cap (int): Maximum number of actions any enumeration may return.
        permutation_cap (int): Maximum decision-set size for ranking search.
        disjunction_max_n (int): Maximum n for enumerating all 3^n disjunctions.
        richness_max_n (int): Maximum n for exhaustive richness checks.
        property2_max_p (int): Maximum p for exhaustive bit-pattern checks.
        search_cap (int): Maximum raw candidates (subsets, combinations) an
            enumeration may examine.
        sample_budget (int): Number of checks made in sampled verification.
        tolerance (float): Absolute tolerance for floating-point identities.
        sleep_probability (float): Per-element sleeping probability of the
            stock random adversary.
    """

    FIELDS = (
        "enum_cap",
        "permutation_cap",
        "disjunction_max_n",
        "richness_max_n",
        "property2_max_p",
        "search_cap",
        "sample_budget",
        "tolerance",
        "sleep_probability",
    )

    def __init__(
        self,
        enum_cap: int = DEFAULT_ENUM_CAP,
        permutation_cap: int = DEFAULT_PERMUTATION_CAP,
        disjunction_max_n: int = 10,
        richness_max_n: int = 8,
        property2_max_p: int = 12,
        search_cap: int = 1 << 22,
        sample_budget: int = 2000,
        tolerance: float = DEFAULT_TOLERANCE,
        sleep_probability: float = 0.2,
    ):
        self.enum_cap = int(enum_cap)
        self.permutation_cap = int(permutation_cap)
        self.disjunction_max_n = int(disjunction_max_n)
        self.richness_max_n = int(richness_max_n)
        self.property2_max_p = int(property2_max_p)
        self.search_cap = int(search_cap)
        self.sample_budget = int(sample_budget)
        self.tolerance = float(tolerance)
        self.sleep_probability = float(sleep_probability)
        self.validate()

        logger.debug("Created configuration: %s", self.to_dict())

    def validate(self) -> None:
        """Reject non-positive limits and out-of-range probabilities."""
        for name in self.FIELDS:
            if name == "sleep_probability":
                continue
            if getattr(self, name) <= 0:
                raise InvalidInstance(f"Configuration value {name} must be positive")
        if not 0.0 <= self.sleep_probability < 1.0:
            raise InvalidInstance("sleep_probability must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}

    def with_env_overrides(self) -> "SleepcombConfig":
        """Apply ``SLEEPCOMB_ENUM_CAP`` if it is set."""
        raw = os.environ.get(ENUM_CAP_ENV)
        if raw is None or not raw.strip():
            return self
        try:
            cap = int(raw)
        except ValueError as e:
            raise InvalidInstance(f"{ENUM_CAP_ENV} must be an integer: {raw!r}") from e
        logger.info("Enumeration cap overridden by %s=%d", ENUM_CAP_ENV, cap)
        data = self.to_dict()
        data["enum_cap"] = cap
        return SleepcombConfig.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "SleepcombConfig":
        """Create configuration from a dictionary.

        Raises:
            InvalidInstance: If the dictionary has keys that are not config fields.
        """
        unknown = set(data) - set(cls.FIELDS)
        if unknown:
            raise InvalidInstance(
                f"Unknown configuration keys: {', '.join(sorted(unknown))}"
            )
        logger.debug("Creating configuration from dictionary: %s", data)
        return cls(**data)

    @classmethod
    def from_file(cls, config_path: str) -> "SleepcombConfig":
        """Create configuration from a YAML file.

        Missing, unreadable or malformed files fall back to defaults with a
        warning; unknown keys are still an error.
        """
        logger.debug("Loading configuration from %s", config_path)

        if not os.path.exists(config_path):
            logger.info("Config file not found at %s, using defaults", config_path)
            return cls()

        try:
            with open(config_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (IOError, UnicodeError) as e:
            logger.warning("Error reading config file %s: %s", config_path, e)
            return cls()
        except yaml.YAMLError as e:
            logger.warning("YAML parsing error in %s: %s", config_path, e)
            return cls()

        if not isinstance(data, dict):
            logger.warning(
                "Invalid config format in %s (not a dictionary), using defaults",
                config_path,
            )
            return cls()
        logger.info("Loaded config from %s", config_path)
        return cls.from_dict(data)


_active: Optional[SleepcombConfig] = None


def current() -> SleepcombConfig:
    """Return the active configuration, building the default on first use."""
    global _active
    if _active is None:
        _active = SleepcombConfig().with_env_overrides()
    return _active


def activate(config: Optional[SleepcombConfig]) -> None:
    """Install ``config`` as the active configuration (``None`` resets it)."""
    global _active
    _active = config


def resolve_enum_cap(cap: Optional[int] = None) -> int:
    return current().enum_cap if cap is None else cap
