import json


class BaseRunError(Exception):
    default_msg = None
    exit_code = 1

    def __init__(self, data=None):
        if data is None:
            data = self.default_msg
        self.data = data
        super(BaseRunError, self).__init__(self.render(data))

    @staticmethod
    def render(data):
        if isinstance(data, str):
            return data
        return json.dumps(data, sort_keys=True)


class ValidationError(BaseRunError):
    default_msg = {'detail': 'Bad arguments'}
    exit_code = 2


class ShapeError(ValidationError, ValueError):
    default_msg = {'detail': 'Shape mismatch'}

    def __init__(self, primitive, *shapes):
        self.primitive = primitive
        self.shapes = shapes
        data = '{}: incompatible shapes {}'.format(primitive, ' and '.join(str(tuple(s)) for s in shapes))
        super(ShapeError, self).__init__(data)


class GradientError(ValidationError):
    default_msg = {'detail': 'Gradient unavailable'}


class EmptyDataset(ValidationError):
    default_msg = {'detail': 'No rows left'}


class BootstrapUndefined(ValidationError):
    default_msg = {'detail': 'stratified bootstrap undefined'}


class UnknownTask(ValidationError):
    default_msg = {'detail': 'Unknown task'}

    def __init__(self, task, known=()):
        self.task = task
        super(UnknownTask, self).__init__('unknown task "{}", expected one of {}'.format(task, sorted(known)))


class StorageError(BaseRunError):
    default_msg = {'detail': 'I/O failure'}
    exit_code = 3


class FileFormatError(StorageError):
    reason = 'malformed file'

    def __init__(self, path, offset, detail=None):
        self.path = str(path)
        self.offset = offset
        msg = '{}: {} at offset {}'.format(self.path, self.reason, offset)
        if detail:
            msg = '{} ({})'.format(msg, detail)
        super(FileFormatError, self).__init__(msg)


class BadMagic(FileFormatError):
    reason = 'bad magic'


class UnsupportedVersion(FileFormatError):
    reason = 'unsupported version'


class DimensionMismatch(FileFormatError):
    reason = 'dim mismatch'


class TruncatedFile(FileFormatError):
    reason = 'truncated file'


class NumericAbort(BaseRunError):
    default_msg = {'detail': 'Non-finite value'}
    exit_code = 4

    def __init__(self, step, term, value=float('nan')):
        self.step = step
        self.term = term
        super(NumericAbort, self).__init__('non-finite {} ({}) at step {}'.format(term, value, step))


class DegenerateEmbedding(NumericAbort):
    def __init__(self, rows):
        self.step = None
        self.term = 'embedding'
        BaseRunError.__init__(self, 'degenerate embedding: zero vector in rows {}'.format(list(rows)[:8]))
