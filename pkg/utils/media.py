import os
import re
import shutil
from pathlib import Path

from utils.exceptions import StorageError, ValidationError

CHECKPOINT_DIR = 'checkpoints'
CHECKPOINT_RE = re.compile(r'^step_(\d+)\.json$')


def generate_path_to_dir(root, *args):
    path = Path(root)
    for arg in args:
        path = path / str(arg)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StorageError('cannot create {}: {}'.format(path, exc))
    return path


def prepare_run_dir(path, force=False):
    """Creates an empty run directory; an existing non-empty one needs ``force``."""
    path = Path(path)
    if path.exists() and any(path.iterdir()):
        if not force:
            raise ValidationError('run directory {} is not empty; pass --force to replace it'.format(path))
        try:
            shutil.rmtree(path)
        except OSError as exc:
            raise StorageError('cannot clear {}: {}'.format(path, exc))
    return generate_path_to_dir(path)


def checkpoint_path(run_dir, step):
    return generate_path_to_dir(run_dir, CHECKPOINT_DIR) / 'step_{:08d}'.format(step)


def list_checkpoints(run_dir):
    folder = Path(run_dir) / CHECKPOINT_DIR
    if not folder.is_dir():
        return []
    steps = sorted(int(m.group(1)) for m in map(CHECKPOINT_RE.match, os.listdir(folder)) if m)
    return [(step, folder / 'step_{:08d}'.format(step)) for step in steps]


def latest_checkpoint(run_dir):
    found = list_checkpoints(run_dir)
    if not found:
        raise StorageError('no checkpoint in {}'.format(run_dir))
    return found[-1][1]


def resolve_checkpoint(path):
    """Accepts a run directory, a checkpoint stem or either of its two files."""
    path = Path(path)
    if path.is_dir():
        return latest_checkpoint(path)
    return path.with_suffix('')
