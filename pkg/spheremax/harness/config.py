"""Run configuration, built-in presets and user preset storage."""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from ..errors import DomainError, UnknownExperimentError

logger = logging.getLogger(__name__)

# fields that only decide where and how a run happens, never what it computes
NON_RESULT_FIELDS = ('out', 'svg', 'workers', 'debug')


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: Optional[int] = None
    j_min: int = 4
    j_max: int = 10
    epsilon: float = 0.1
    grid_n: Optional[int] = None
    grid_l: Optional[float] = None
    t_ratio: float = 2.0 ** (1.0 / 16.0)
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    seed: int = 0
    out: str = "results"
    svg: bool = False
    workers: int = 1
    debug: bool = False

    def __post_init__(self):
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise DomainError(f"config: n must be a positive integer, got {self.n}")
        if self.j_min < 0 or self.j_max < self.j_min:
            raise DomainError(f"config: need 0 <= j_min <= j_max, got {self.j_min}, {self.j_max}")
        if self.t_ratio <= 1:
            raise DomainError(f"config: t_ratio must exceed 1, got {self.t_ratio}")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise DomainError(f"config: seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.workers < 1:
            raise DomainError(f"config: workers must be >= 1, got {self.workers}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"config: unknown fields {sorted(unknown)}")
        return cls(**data)

    def result_dict(self):
        """The fields that determine the numbers an experiment produces."""
        return {k: v for k, v in self.to_dict().items() if k not in NON_RESULT_FIELDS}

    def canonical_json(self):
        return json.dumps(self.result_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self):
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def j_range(self):
        return range(self.j_min, self.j_max + 1)

    def with_overrides(self, **overrides):
        """Copy with every override that is not None applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


# acceptance configuration of every experiment; None keeps the dataclass default
DEFAULT_PRESETS = {
    'region-table': {},
    'dsigma-decay': {'r_min': 2.0 ** 5, 'r_max': 2.0 ** 10},
    'symbol-sup-decay': {'n': 2, 'j_min': 4, 'j_max': 10},
    'symbol-l2-growth': {'n': 2, 'j_min': 4, 'j_max': 10},
    'partition-check': {'n': 2, 'j_min': 1, 'j_max': 16},
    'cov-identity': {},
    'avg-crosscheck': {},
    'maximal-sanity': {'n': 1, 'grid_n': 128, 'grid_l': 16.0},
    'squarefn-bound': {'n': 1, 'j_min': 3, 'j_max': 5, 'grid_n': 64, 'grid_l': 16.0,
                       't_ratio': 2.0 ** (1.0 / 256.0)},
    'opnorm-trend': {'n': 1, 'j_min': 1, 'j_max': 6, 'grid_n': 64, 'grid_l': 16.0},
    'cex-growth': {'r_min': 2.0 ** 10, 'r_max': 2.0 ** 16},
    'cex-divergence': {'n': 1, 'r_min': 100.0},
    'monotone-lemma': {},
}


def default_config(experiment, **overrides):
    """The built-in preset of ``experiment`` with ``overrides`` applied on top."""
    if experiment not in DEFAULT_PRESETS:
        raise UnknownExperimentError(experiment)
    config = ExperimentConfig(experiment=experiment, **DEFAULT_PRESETS[experiment])
    return config.with_overrides(**overrides)


class PresetManager:
    """Named sets of configuration overrides kept in a JSON file."""

    def __init__(self, config_file=None):
        self.presets = {}
        if config_file is None:
            self.config_dir = os.path.expanduser("~/.config/spheremax")
            self.config_file = os.path.join(self.config_dir, "presets.json")
        else:
            self.config_file = os.fspath(config_file)
            self.config_dir = os.path.dirname(self.config_file) or "."
        self.load_presets()

    def add_preset(self, name, overrides):
        known = {f.name for f in fields(ExperimentConfig)} - {'experiment'}
        unknown = set(overrides) - known
        if unknown:
            raise DomainError(f"add_preset: unknown fields {sorted(unknown)}")
        self.presets[name] = {k: v for k, v in overrides.items() if v is not None}

    def remove_preset(self, name):
        if name in self.presets:
            del self.presets[name]

    def get_preset(self, name):
        return self.presets.get(name)

    def save_presets(self):
        os.makedirs(self.config_dir, exist_ok=True)
        with open(self.config_file, 'w') as f:
            json.dump(self.presets, f, indent=2, sort_keys=True)
        logger.debug("save_presets: %d presets -> %s", len(self.presets), self.config_file)

    def load_presets(self):
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, 'r') as f:
                    data = json.load(f)
                if not isinstance(data, dict):
                    raise ValueError("top level must be an object")
                self.presets = data
        except (OSError, ValueError) as e:
            logger.warning("load_presets: ignoring %s: %s", self.config_file, e)
            self.presets = {}
