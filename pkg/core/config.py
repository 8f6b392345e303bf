"""
Experiment configuration: dataclasses, TOML loading, scenario presets and
environment defaults.
"""

import hashlib
import json
import logging
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from core.errors import ConfigError
from core.scenarios import REAL_DATA_ROSTER, ROSTER, get_scenario
from core.simulate import ClassModel, model_from_dict


logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 4
DEFAULT_LOG_LEVEL = 'INFO'
DEFAULT_SAMPLING_INTERVAL = 10.0

WORKERS_ENV = 'FUNCGAUSS_WORKERS'
LOG_LEVEL_ENV = 'FUNCGAUSS_LOG_LEVEL'


def env_workers() -> int:
    """Parallel workers from FUNCGAUSS_WORKERS (default 4)."""
    raw = os.getenv(WORKERS_ENV, '')
    if not raw:
        return DEFAULT_WORKERS

    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got '{raw}'") from None

    if workers < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return workers


def env_log_level() -> str:
    return os.getenv(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL).upper()


@dataclass(frozen=True)
class CVGrids:
    """Cross-validation candidates. h is given in grid steps."""

    h_steps: Tuple[int, ...] = tuple(range(2, 21, 2))
    k: Tuple[int, ...] = tuple(range(1, 11))
    d: Tuple[int, ...] = tuple(range(1, 6))
    delta_n: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'h_steps': list(self.h_steps), 'k': list(self.k),
            'd': list(self.d), 'delta_n': self.delta_n,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    model0: ClassModel
    model1: ClassModel
    scenario_id: Optional[str] = None
    n_train: int = 100
    n_test: int = 50
    n_intervals: int = 50
    runs: int = 200
    seed: int = 0
    prior_p: float = 0.5
    roster: Tuple[str, ...] = ROSTER
    cv: CVGrids = field(default_factory=CVGrids)

    @classmethod
    def from_scenario(cls, scenario_id: str, **overrides) -> 'ExperimentConfig':
        scenario = get_scenario(scenario_id)
        return cls(scenario.model0, scenario.model1, scenario_id=scenario_id, **overrides)

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        """Replace the fields given with non-None values."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scenario': self.scenario_id,
            'model0': self.model0.describe(),
            'model1': self.model1.describe(),
            'n_train': self.n_train,
            'n_test': self.n_test,
            'n_intervals': self.n_intervals,
            'runs': self.runs,
            'seed': self.seed,
            'prior_p': self.prior_p,
            'roster': list(self.roster),
            'cv': self.cv.to_dict(),
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class RealDataConfig:
    """
    Leave-one-out evaluation of a curve CSV.

    transform is 'identity' or 'log-offset' (X = log(value - offset)); trim
    drops that many leading samples before the time axis is mapped onto [0, 1].
    """

    input_path: Union[str, Path]
    label_column: str = 'label'
    transform: str = 'identity'
    offset: Optional[float] = None
    trim: int = 0
    roster: Tuple[str, ...] = REAL_DATA_ROSTER
    cv: CVGrids = field(default_factory=CVGrids)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'input': str(self.input_path),
            'label_column': self.label_column,
            'transform': self.transform,
            'offset': self.offset,
            'trim': self.trim,
            'roster': list(self.roster),
            'cv': self.cv.to_dict(),
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def parse_transform(text: str) -> Tuple[str, Optional[float]]:
    """
    'identity' or 'log-offset:<offset>'.

    Raises:
        ConfigError: On any other form
    """
    text = (text or 'identity').strip().lower()
    if text == 'identity':
        return 'identity', None

    name, _, value = text.partition(':')
    if name == 'log-offset' and value:
        try:
            return 'log-offset', float(value)
        except ValueError:
            pass

    raise ConfigError(f"Transform must be 'identity' or 'log-offset:<number>', got '{text}'")


def parse_model_spec(text: str) -> ClassModel:
    """
    Model from 'family:key=value,...', e.g. 'ou:beta=1,eta=0,sigma=1,start=random'.

    Raises:
        ConfigError: On malformed text or invalid parameters
    """
    family, _, rest = text.strip().partition(':')
    params: Dict[str, Any] = {'family': family}

    for item in filter(None, (part.strip() for part in rest.split(','))):
        key, sep, value = item.partition('=')
        if not sep:
            raise ConfigError(f"Model parameter '{item}' is not of the form key=value")
        key = key.strip()
        value = value.strip()
        if key == 'with_drift':
            params[key] = value.lower() in ('1', 'true', 'yes')
        elif key == 'start':
            params[key] = value.lower()
        else:
            params[key] = value

    return model_from_dict(params)


def _cv_from_dict(data: Dict[str, Any]) -> CVGrids:
    defaults = CVGrids()
    try:
        return CVGrids(
            h_steps=tuple(int(v) for v in data.get('h_steps', defaults.h_steps)),
            k=tuple(int(v) for v in data.get('k', defaults.k)),
            d=tuple(int(v) for v in data.get('d', defaults.d)),
            delta_n=data.get('delta_n'),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid [cv] table: {e}") from e


def experiment_config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    """
    Build a config from a parsed TOML document.

    A 'scenario' key supplies both models; explicit [model0] / [model1]
    tables override them.
    """
    data = dict(data)
    scenario_id = data.pop('scenario', None)

    if scenario_id is not None:
        scenario = get_scenario(scenario_id)
        model0, model1 = scenario.model0, scenario.model1
    else:
        model0 = model1 = None

    if 'model0' in data:
        model0 = model_from_dict(data.pop('model0'))
    if 'model1' in data:
        model1 = model_from_dict(data.pop('model1'))

    if model0 is None or model1 is None:
        raise ConfigError("Config needs a 'scenario' or both [model0] and [model1] tables")

    cv = _cv_from_dict(data.pop('cv', {}))
    roster = tuple(data.pop('roster', ROSTER))

    known = {'n_train', 'n_test', 'n_intervals', 'runs', 'seed', 'prior_p'}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(sorted(unknown))}")

    try:
        options = {
            key: (float(value) if key == 'prior_p' else int(value))
            for key, value in data.items()
        }
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid config value: {e}") from e

    return ExperimentConfig(
        model0, model1, scenario_id=scenario_id, roster=roster, cv=cv, **options
    )


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Read an experiment TOML file.

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    try:
        with open(path, 'rb') as handle:
            data = tomllib.load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read config '{path}': {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Invalid TOML in '{path}': {e}") from e

    logger.info("Loaded experiment config from %s", path)
    return experiment_config_from_dict(data)


def h_candidates(cv: CVGrids, delta: float) -> Sequence[float]:
    return [steps * delta for steps in cv.h_steps]
