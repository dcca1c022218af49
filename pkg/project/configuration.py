"""Run configuration: settings defaults < TOML file < command-line overrides."""
import copy
import logging
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import attr
import tomli_w

from apps.baselines.serializers import BaselineConfigSerializer
from apps.datasets.serializers import DatasetConfigSerializer
from apps.evaluation.serializers import EvalConfigSerializer
from apps.fb.serializers import ModelConfigSerializer, PenaltyConfigSerializer, TrainConfigSerializer
from apps.maze.serializers import MazeSpecSerializer
from project import settings
from utils.exceptions import StorageError, ValidationError
from utils.hash import hash_config

logger = logging.getLogger(__name__)

CONFIG_FILE = 'config.toml'
SCALES = ('desk', 'full')

SECTIONS = {
    'env': MazeSpecSerializer,
    'dataset': DatasetConfigSerializer,
    'model': ModelConfigSerializer,
    'train': TrainConfigSerializer,
    'penalty': PenaltyConfigSerializer,
    'baseline': BaselineConfigSerializer,
    'eval': EvalConfigSerializer,
}


@attr.s
class RunConfig(object):
    env = attr.ib()
    dataset = attr.ib()
    model = attr.ib()
    train = attr.ib()
    penalty = attr.ib()
    baseline = attr.ib()
    eval = attr.ib()

    def to_dict(self):
        return {name: serializer().to_json(getattr(self, name)) for name, serializer in SECTIONS.items()}

    def digest(self):
        return hash_config(self.to_dict())

    def dumps(self):
        return tomli_w.dumps(self.to_dict())

    def replace(self, **sections):
        """A copy with some section attributes replaced, e.g. ``replace(train={'seed': 3})``."""
        data = self.to_dict()
        merge(data, sections)
        return build_config(data)

    def write(self, run_dir):
        path = Path(run_dir) / CONFIG_FILE
        try:
            path.write_text(self.dumps())
        except OSError as exc:
            raise StorageError('cannot write {}: {}'.format(path, exc))
        return path


def merge(base, update):
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            merge(base[key], value)
        else:
            base[key] = value
    return base


def read_toml(path):
    try:
        with open(path, 'rb') as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise StorageError('cannot read config {}: {}'.format(path, exc))
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError({'config': '{}: {}'.format(path, exc)})


def parse_overrides(pairs):
    """``['train.seed=7', 'penalty.budget=10']`` -> nested dict of raw strings."""
    overrides = {}
    for pair in pairs or ():
        key, sep, value = pair.partition('=')
        section, dot, field = key.strip().partition('.')
        if not sep or not dot or not field:
            raise ValidationError({'override': 'expected section.key=value, got "{}"'.format(pair)})
        overrides.setdefault(section, {})[field] = value.strip()
    return overrides


def build_config(data):
    unknown = sorted(set(data) - set(SECTIONS))
    errors = {name: 'Unknown section' for name in unknown}
    sections = {}
    for name, serializer_class in SECTIONS.items():
        serializer = serializer_class(data=data.get(name, {}))
        try:
            serializer.is_valid()
        except ValidationError as exc:
            errors[name] = exc.data
            continue
        sections[name] = serializer.instance
    if not errors:
        errors = cross_check(sections)
    if errors:
        raise ValidationError(errors)
    return RunConfig(**sections)


def cross_check(sections):
    errors = {}
    goals = sections['env'].goals
    missing = [t for t in sections['eval'].tasks if t not in goals]
    if missing:
        errors['eval'] = {'tasks': 'unknown tasks {}'.format(missing)}
    if sections['baseline'].task not in goals:
        errors['baseline'] = {'task': 'unknown task "{}"'.format(sections['baseline'].task)}
    return errors


def load_config(path=None, overrides=None, scale='desk'):
    if scale not in SCALES:
        raise ValidationError({'scale': '"{}" is not one of {}'.format(scale, list(SCALES))})
    data = copy.deepcopy(settings.FULL_SCALE) if scale == 'full' else {}
    if path is not None:
        merge(data, read_toml(path))
    merge(data, overrides or {})
    config = build_config(data)
    logger.debug('Resolved config %s', config.digest())
    return config


def load_run_config(run_dir):
    path = Path(run_dir) / CONFIG_FILE
    if not path.exists():
        raise StorageError('no {} in {}'.format(CONFIG_FILE, run_dir))
    return build_config(read_toml(path))
