import logging

from apps.datasets import storage
from apps.datasets.generation import build_dataset
from apps.datasets.serializers import DatasetSummarySerializer
from apps.maze.policies import BEHAVIOUR_POLICIES
from apps.maze.transforms import ascii_occupancy, coverage, write_occupancy_csv
from utils.commands import BaseCommand, CommandTableDef, set_override

logger = logging.getLogger(__name__)

dataset_commands = CommandTableDef()


@dataset_commands.command('gen-dataset')
class GenerateDatasetCommand(BaseCommand):
    """Rolls a behaviour policy in the maze and writes the transitions as an FBDS file."""

    help = 'generate an offline maze dataset'
    uses_config = True

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--env', choices=('maze',), default='maze')
        parser.add_argument('--policy', choices=sorted(BEHAVIOUR_POLICIES))
        parser.add_argument('--episodes', type=int)
        parser.add_argument('--out', required=True, help='FBDS file to write')
        parser.add_argument('--filter-left', action='store_true', default=None,
                            help='drop transitions whose action pushes left')
        parser.add_argument('--subsample', type=int, help='rows to keep; 0 keeps all')
        parser.add_argument('--seed', type=int)

    def get_overrides(self):
        overrides = super(GenerateDatasetCommand, self).get_overrides()
        for key in ('policy', 'episodes', 'filter_left', 'subsample', 'seed'):
            set_override(overrides, 'dataset', key, getattr(self.args, key))
        return overrides

    def handle(self):
        config = self.get_config()
        spec = config.env
        dataset = build_dataset(spec, config.dataset, BEHAVIOUR_POLICIES,
                                exact_subsample=self.args.subsample is not None)
        storage.save(dataset, self.args.out)
        occupancy_path = write_occupancy_csv('{}.occupancy.csv'.format(self.args.out), dataset.states)

        summary = DatasetSummarySerializer().to_json({
            'rows': len(dataset),
            'state_dim': dataset.state_dim,
            'action_dim': dataset.action_dim,
            'coverage': coverage(dataset.states, spec),
            'generator': dataset.metadata.get('generator'),
            'seed': dataset.metadata.get('seed'),
        })
        logger.info('Dataset coverage %.3f, occupancy written to %s', summary['coverage'], occupancy_path)
        self.echo('rows: {rows}\ncoverage: {coverage:.3f}'.format(**summary))
        self.echo(ascii_occupancy(dataset.states, spec))
        return summary
