import argparse
import logging
import sys

from project import settings
from project.commands import setup_commands
from utils.exceptions import BaseRunError

logger = logging.getLogger('main')

parser = argparse.ArgumentParser(description='Forward-backward representations for zero-shot offline RL')
parser.add_argument('-v', '--verbose', action='store_true', help='log every training step')
parser.add_argument('-q', '--quiet', action='store_true', help='log warnings and errors only')
subparsers = parser.add_subparsers(dest='name', metavar='command', required=True)
setup_commands(subparsers)


def main(argv=None, stdout=None):
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=settings.LOG_FORMAT)
    try:
        args.command(args, stdout=stdout).handle()
    except BaseRunError as exc:
        logger.debug('%s failed', args.name, exc_info=True)
        sys.stderr.write('error: {}\n'.format(exc))
        return exc.exit_code
    return settings.EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
