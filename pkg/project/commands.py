from apps.datasets.views import dataset_commands
from apps.evaluation.views import evaluation_commands
from apps.fb.views import fb_commands


def setup_commands(subparsers):
    for table in (dataset_commands, fb_commands, evaluation_commands):
        for command in table:
            command.register(subparsers)
