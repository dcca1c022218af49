import csv
import logging

import numpy as np

from project import settings
from utils.exceptions import EmptyDataset, StorageError

logger = logging.getLogger(__name__)

SHADES = ' .:-=+*%@'


def filter_left_actions(dataset):
    """Drops every transition whose action pushes left (a_x < 0)."""
    keep = np.flatnonzero(dataset.actions[:, 0] >= 0.0)
    if keep.size == 0:
        raise EmptyDataset('dataset exhausted by filter')
    logger.info('Left-action filter kept %d of %d transitions', keep.size, len(dataset))
    return dataset.select(keep, filter_left=True)


def occupancy(states, bins=settings.OCCUPANCY_BINS):
    """Visit counts of positions on a ``bins`` x ``bins`` grid; row 0 is the bottom of the maze."""
    positions = np.asarray(states, dtype=np.float64)[:, :2]
    cells = np.clip(np.floor(positions * bins).astype(np.int64), 0, bins - 1)
    grid = np.zeros((bins, bins), dtype=np.int64)
    np.add.at(grid, (cells[:, 1], cells[:, 0]), 1)
    return grid


def free_cells(spec, bins=settings.OCCUPANCY_BINS):
    centres = (np.arange(bins) + 0.5) / bins
    return np.array([[spec.is_free((x, y)) for x in centres] for y in centres])


def coverage(states, spec, bins=settings.OCCUPANCY_BINS):
    """Fraction of free grid cells visited at least once."""
    free = free_cells(spec, bins)
    visited = (occupancy(states, bins) > 0) & free
    return float(visited.sum()) / float(free.sum())


def ascii_occupancy(states, spec, bins=settings.OCCUPANCY_BINS):
    grid = occupancy(states, bins)
    free = free_cells(spec, bins)
    peak = max(int(grid.max()), 1)
    lines = []
    for row in range(bins - 1, -1, -1):
        chars = []
        for col in range(bins):
            if not free[row, col] and grid[row, col] == 0:
                chars.append('#')
            elif grid[row, col] == 0:
                chars.append(SHADES[0])
            else:
                level = 1 + int((len(SHADES) - 2) * grid[row, col] / peak)
                chars.append(SHADES[min(level, len(SHADES) - 1)])
        lines.append(''.join(chars))
    return '\n'.join(lines)


def write_occupancy_csv(path, states, bins=settings.OCCUPANCY_BINS):
    grid = occupancy(states, bins)
    try:
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh)
            writer.writerow(['row', 'col', 'x_low', 'y_low', 'count'])
            for row in range(bins):
                for col in range(bins):
                    writer.writerow([row, col, col / bins, row / bins, int(grid[row, col])])
    except OSError as exc:
        raise StorageError('cannot write occupancy {}: {}'.format(path, exc))
    return path
