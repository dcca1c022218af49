import hashlib
import json

import numpy as np


def hash_config(config):
    t_sha = hashlib.sha256()
    t_sha.update(json.dumps(config, sort_keys=True, default=list).encode('utf-8'))
    return t_sha.hexdigest()


def hash_arrays(named_arrays):
    t_sha = hashlib.sha256()
    for name, array in sorted(named_arrays.items()):
        array = np.ascontiguousarray(array, dtype='<f8')
        t_sha.update(name.encode('utf-8'))
        t_sha.update(str(array.shape).encode('utf-8'))
        t_sha.update(array.tobytes())
    return t_sha.hexdigest()
