import logging

import attr
import numpy as np

from apps.datasets.storage import block_paths, load_tensor_block, save_tensor_block
from apps.fb.models import FBModel, ModelConfig
from utils.exceptions import StorageError
from utils.hash import hash_arrays

logger = logging.getLogger(__name__)


@attr.s
class Checkpoint(object):
    arrays = attr.ib()
    manifest = attr.ib()

    @property
    def step(self):
        return self.manifest['step']

    @property
    def kind(self):
        return self.manifest['kind']

    @property
    def config(self):
        return self.manifest['config']

    def module_state(self, key):
        prefix = 'module/{}/'.format(key)
        return {name[len(prefix):]: value for name, value in self.arrays.items() if name.startswith(prefix)}

    def optimizer_state(self, key):
        prefix = 'optim/{}/'.format(key)
        arrays = {name[len(prefix):]: value for name, value in self.arrays.items() if name.startswith(prefix)}
        return self.manifest['optimizers'][key], arrays

    def restore(self, modules=None, optimizers=None):
        for key, module in (modules or {}).items():
            module.load_state_dict(self.module_state(key))
        for key, optimizer in (optimizers or {}).items():
            optimizer.load_state_dict(*self.optimizer_state(key))

    def restore_rngs(self, rngs):
        for key, rng in rngs.items():
            rng.bit_generator.state = self.manifest['rngs'][key]


def save_checkpoint(path, kind, step, config, modules, optimizers=None, rngs=None, **extra):
    """Writes modules, optimiser moments and generator states as one tensor block."""
    arrays = {}
    for key, module in modules.items():
        for name, value in module.state_dict().items():
            arrays['module/{}/{}'.format(key, name)] = value
    scalars = {}
    for key, optimizer in (optimizers or {}).items():
        scalars[key], moments = optimizer.state_dict()
        for name, value in moments.items():
            arrays['optim/{}/{}'.format(key, name)] = value

    manifest = dict(extra)
    manifest.update({
        'kind': kind,
        'step': int(step),
        'config': config,
        'optimizers': scalars,
        'rngs': {key: rng.bit_generator.state for key, rng in (rngs or {}).items()},
        'digest': hash_arrays(arrays),
    })
    bin_path, _ = save_tensor_block(path, arrays, **manifest)
    logger.info('Checkpoint at step %d written to %s', step, bin_path)
    return bin_path


def load_checkpoint(path):
    bin_path, json_path = block_paths(path)
    if not bin_path.exists() or not json_path.exists():
        raise StorageError('checkpoint {} not found'.format(bin_path.with_suffix('')))
    arrays, manifest = load_tensor_block(path)
    if manifest.get('digest') != hash_arrays(arrays):
        raise StorageError('checkpoint {} does not match its recorded digest'.format(bin_path))
    return Checkpoint(arrays=arrays, manifest=manifest)


def restore_fb_model(checkpoint):
    config = checkpoint.config
    model = FBModel(ModelConfig(**config['model']), checkpoint.manifest['state_dim'],
                    checkpoint.manifest['action_dim'], np.random.default_rng(0), polyak=config['train']['polyak'])
    model.load_state_dict(checkpoint.module_state('fb'))
    return model
