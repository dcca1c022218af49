import json
import sys

from project.configuration import load_config, parse_overrides
from utils.exceptions import StorageError


class CommandTableDef(object):
    """Collects command classes declared with ``@table.command('name')``."""

    def __init__(self):
        self._commands = []

    def command(self, name):
        def wrapper(cls):
            cls.name = name
            self._commands.append(cls)
            return cls
        return wrapper

    def __iter__(self):
        return iter(self._commands)


class BaseCommand(object):
    name = None
    help = None
    uses_config = False

    def __init__(self, args, stdout=None):
        self.args = args
        self.stdout = stdout if stdout is not None else sys.stdout

    @classmethod
    def register(cls, subparsers):
        assert cls.name is not None, 'Register {} through a CommandTableDef'.format(cls.__name__)
        parser = subparsers.add_parser(cls.name, help=cls.help, description=cls.__doc__)
        if cls.uses_config:
            parser.add_argument('--config', help='TOML config file')
            parser.add_argument('--scale', choices=('desk', 'full'), default='desk')
            parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='SECTION.KEY=VALUE',
                                help='override one config value (repeatable)')
        cls.add_arguments(parser)
        parser.set_defaults(command=cls)
        return parser

    @classmethod
    def add_arguments(cls, parser):
        pass

    def handle(self):
        raise NotImplementedError

    def get_overrides(self):
        """Config overrides from ``--set`` plus the command's dedicated flags."""
        return parse_overrides(self.args.overrides)

    def get_config(self):
        return load_config(self.args.config, self.get_overrides(), scale=self.args.scale)

    def echo(self, text=''):
        self.stdout.write('{}\n'.format(text))

    @staticmethod
    def write_json(path, data):
        try:
            with open(path, 'w') as fh:
                json.dump(data, fh, indent=2, sort_keys=True)
        except OSError as exc:
            raise StorageError('cannot write {}: {}'.format(path, exc))
        return path


def set_override(overrides, section, key, value):
    if value is not None:
        overrides.setdefault(section, {})[key] = value
    return overrides
