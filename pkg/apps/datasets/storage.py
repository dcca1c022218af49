"""Binary persistence.

FBDS layout (little-endian): magic ``FBDS``, version byte, u32 state_dim,
u32 action_dim, u64 count, then ``count`` packed records of
state f64[s], action f64[a], next_state f64[s], reward f64, terminal u8,
then a u32 length and that many bytes of JSON metadata.

Tensor blocks (``FBTB``) hold named f64 arrays back to back; their names,
shapes and offsets live in a JSON manifest written next to the block.
"""
import json
import logging
import struct
from pathlib import Path

import numpy as np

from apps.datasets.models import Dataset
from project import settings
from utils.exceptions import (BadMagic, DimensionMismatch, StorageError, TruncatedFile,
                              UnsupportedVersion)

logger = logging.getLogger(__name__)

HEADER = struct.Struct('<4sBIIQ')
LENGTH = struct.Struct('<I')
BLOCK_HEADER = struct.Struct('<4sBI')


def record_dtype(state_dim, action_dim):
    return np.dtype([
        ('state', '<f8', (state_dim,)),
        ('action', '<f8', (action_dim,)),
        ('next_state', '<f8', (state_dim,)),
        ('reward', '<f8'),
        ('terminal', 'u1'),
    ])


def _write_bytes(path, payload):
    try:
        Path(path).write_bytes(payload)
    except OSError as exc:
        raise StorageError('cannot write {}: {}'.format(path, exc))


def _read_bytes(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise StorageError('cannot read {}: {}'.format(path, exc))


def dumps(dataset):
    records = np.empty(len(dataset), dtype=record_dtype(dataset.state_dim, dataset.action_dim))
    records['state'] = dataset.states
    records['action'] = dataset.actions
    records['next_state'] = dataset.next_states
    records['reward'] = dataset.rewards
    records['terminal'] = dataset.terminals
    metadata = json.dumps(dataset.metadata, sort_keys=True).encode('utf-8')
    header = HEADER.pack(settings.FBDS_MAGIC, settings.FBDS_VERSION,
                         dataset.state_dim, dataset.action_dim, len(dataset))
    return b''.join([header, records.tobytes(), LENGTH.pack(len(metadata)), metadata])


def loads(payload, path='<bytes>', state_dim=None, action_dim=None):
    if len(payload) < HEADER.size:
        if len(payload) >= 4 and payload[:4] != settings.FBDS_MAGIC:
            raise BadMagic(path, 0)
        raise TruncatedFile(path, len(payload), 'header needs {} bytes'.format(HEADER.size))

    magic, version, s_dim, a_dim, count = HEADER.unpack_from(payload, 0)
    if magic != settings.FBDS_MAGIC:
        raise BadMagic(path, 0, 'found {!r}'.format(magic))
    if version != settings.FBDS_VERSION:
        raise UnsupportedVersion(path, 4, 'found {}'.format(version))
    if s_dim == 0 or a_dim == 0:
        raise DimensionMismatch(path, 5, 'zero dimension ({}, {})'.format(s_dim, a_dim))
    if state_dim is not None and s_dim != state_dim:
        raise DimensionMismatch(path, 5, 'state_dim {} != expected {}'.format(s_dim, state_dim))
    if action_dim is not None and a_dim != action_dim:
        raise DimensionMismatch(path, 9, 'action_dim {} != expected {}'.format(a_dim, action_dim))

    dtype = record_dtype(s_dim, a_dim)
    body_end = HEADER.size + count * dtype.itemsize
    if len(payload) < body_end + LENGTH.size:
        raise TruncatedFile(path, len(payload), 'header promises {} records'.format(count))
    (meta_len,) = LENGTH.unpack_from(payload, body_end)
    meta_start = body_end + LENGTH.size
    if len(payload) != meta_start + meta_len:
        raise TruncatedFile(path, meta_start, 'metadata needs {} bytes, {} present'
                            .format(meta_len, len(payload) - meta_start))
    try:
        metadata = json.loads(payload[meta_start:].decode('utf-8'))
    except (UnicodeDecodeError, ValueError) as exc:
        raise TruncatedFile(path, meta_start, 'unreadable metadata: {}'.format(exc))

    records = np.frombuffer(payload, dtype=dtype, count=count, offset=HEADER.size)
    return Dataset(states=records['state'], actions=records['action'], next_states=records['next_state'],
                   rewards=records['reward'], terminals=records['terminal'].astype(bool), metadata=metadata)


def save(dataset, path):
    _write_bytes(path, dumps(dataset))
    logger.info('Saved %d transitions to %s', len(dataset), path)


def load(path, state_dim=None, action_dim=None):
    return loads(_read_bytes(path), path=str(path), state_dim=state_dim, action_dim=action_dim)


def block_paths(path):
    path = Path(path)
    return path.with_suffix('.bin'), path.with_suffix('.json')


def save_tensor_block(path, arrays, **manifest):
    """Writes named arrays to ``<path>.bin`` and their manifest to ``<path>.json``."""
    bin_path, json_path = block_paths(path)
    entries = []
    chunks = [BLOCK_HEADER.pack(settings.TENSOR_BLOCK_MAGIC, settings.TENSOR_BLOCK_VERSION, len(arrays))]
    offset = BLOCK_HEADER.size
    for name in sorted(arrays):
        data = np.ascontiguousarray(arrays[name], dtype='<f8')
        entries.append({'name': name, 'shape': list(data.shape), 'offset': offset})
        chunks.append(data.tobytes())
        offset += data.nbytes

    document = dict(manifest)
    document.update({'format': settings.TENSOR_BLOCK_MAGIC.decode('ascii'),
                     'version': settings.TENSOR_BLOCK_VERSION,
                     'tensors': entries})
    _write_bytes(bin_path, b''.join(chunks))
    _write_bytes(json_path, json.dumps(document, indent=2, sort_keys=True).encode('utf-8'))
    return bin_path, json_path


def load_tensor_block(path):
    bin_path, json_path = block_paths(path)
    payload = _read_bytes(bin_path)
    try:
        manifest = json.loads(_read_bytes(json_path).decode('utf-8'))
    except (UnicodeDecodeError, ValueError) as exc:
        raise StorageError('unreadable manifest {}: {}'.format(json_path, exc))

    if len(payload) < BLOCK_HEADER.size:
        raise TruncatedFile(bin_path, len(payload))
    magic, version, count = BLOCK_HEADER.unpack_from(payload, 0)
    if magic != settings.TENSOR_BLOCK_MAGIC:
        raise BadMagic(bin_path, 0, 'found {!r}'.format(magic))
    if version != settings.TENSOR_BLOCK_VERSION:
        raise UnsupportedVersion(bin_path, 4, 'found {}'.format(version))
    if count != len(manifest.get('tensors', ())):
        raise DimensionMismatch(bin_path, 5, 'block holds {} tensors, manifest names {}'
                                .format(count, len(manifest.get('tensors', ()))))

    arrays = {}
    for entry in manifest['tensors']:
        shape = tuple(entry['shape'])
        size = int(np.prod(shape, dtype=np.int64))
        end = entry['offset'] + 8 * size
        if end > len(payload):
            raise TruncatedFile(bin_path, len(payload), 'tensor "{}" ends at {}'.format(entry['name'], end))
        arrays[entry['name']] = np.frombuffer(payload, dtype='<f8', count=size,
                                              offset=entry['offset']).reshape(shape).astype(np.float64)
    return arrays, manifest
