import math


class Empty(object):
    pass


class Field(object):
    expected_types = None
    error_messages = {
        'bad_value': 'Bad value "{value}" for {cls}. Value must be a {types} object',
        'required': 'This field is required',
        'min_value': 'Must be {op} {limit}, got {value}',
        'max_value': 'Must be {op} {limit}, got {value}',
        'choice': '"{value}" is not one of {choices}',
    }

    def __init__(self, required=None, allow_null=False, default=Empty, help_text=None):
        if required is None:
            required = default is Empty and not allow_null

        assert not (required and default is not Empty), 'Required and default is not empty'

        self.required = required
        self.allow_null = allow_null
        self.default = default
        self.help_text = help_text

        self.validation_error = None

    def __repr__(self):
        return '{cls}(required={self.required}, allow_null={self.allow_null}, ' \
               'default={self.default})'.format(cls=self.__class__.__name__, self=self)

    def validate(self, value):
        self.validation_error = None
        validated, value = self.validate_empty_value(value)
        if not validated:
            return value
        value = self.coerce(value)
        if not isinstance(value, self.expected_types) or isinstance(value, bool) and bool not in self._types():
            self.set_error('bad_value', value=value, cls=self.__class__.__name__, types=self.expected_types)
        return value

    def _types(self):
        types = self.expected_types
        return types if isinstance(types, tuple) else (types,)

    def coerce(self, value):
        return value

    def validate_empty_value(self, value):
        if value is Empty:
            if self.required:
                self.set_error('required')
                return False, value
            elif self.default is not Empty:
                return False, self.default
            return False, None
        if value is None:
            if not self.allow_null:
                self.set_error('required')
            return False, None
        return True, value

    def set_error(self, key, **kwargs):
        msg = self.error_messages[key]
        self.validation_error = msg.format(**kwargs)

    def to_representation(self, value):
        return value


class CharField(Field):
    expected_types = str

    def to_representation(self, value):
        return str(value) if value is not None else None


class ChoiceField(CharField):
    def __init__(self, choices, **kwargs):
        self.choices = tuple(choices)
        super(ChoiceField, self).__init__(**kwargs)

    def validate(self, value):
        value = super(ChoiceField, self).validate(value)
        if self.validation_error is None and value is not None and value not in self.choices:
            self.set_error('choice', value=value, choices=list(self.choices))
        return value


class BooleanField(Field):
    expected_types = bool
    FALSE_VALUES = (False, 'false', 0, '0')
    TRUE_VALUES = (True, 'true', 1, '1')

    def coerce(self, value):
        if value in self.FALSE_VALUES:
            return False
        elif value in self.TRUE_VALUES:
            return True
        return value

    def to_representation(self, value):
        return bool(value) if value is not None else None


class NumberField(Field):
    def __init__(self, min_value=None, max_value=None, min_exclusive=False, max_exclusive=False, **kwargs):
        self.min_value = min_value
        self.max_value = max_value
        self.min_exclusive = min_exclusive
        self.max_exclusive = max_exclusive
        super(NumberField, self).__init__(**kwargs)

    def validate(self, value):
        value = super(NumberField, self).validate(value)
        if self.validation_error is not None or value is None:
            return value

        if self.min_value is not None:
            if value < self.min_value or self.min_exclusive and value == self.min_value:
                self.set_error('min_value', op='>' if self.min_exclusive else '>=', limit=self.min_value, value=value)
        if self.max_value is not None:
            if value > self.max_value or self.max_exclusive and value == self.max_value:
                self.set_error('max_value', op='<' if self.max_exclusive else '<=', limit=self.max_value, value=value)
        return value


class IntegerField(NumberField):
    expected_types = int

    def coerce(self, value):
        if isinstance(value, bool):
            return value
        try:
            as_float = float(value)
        except (TypeError, ValueError):
            return value
        if as_float.is_integer():
            return int(as_float)
        return value

    def to_representation(self, value):
        return int(value) if value is not None else None


class FloatField(NumberField):
    expected_types = float

    def coerce(self, value):
        if isinstance(value, bool):
            return value
        try:
            value = float(value)
        except (TypeError, ValueError):
            return value
        return value

    def validate(self, value):
        value = super(FloatField, self).validate(value)
        if self.validation_error is None and value is not None and math.isnan(value):
            self.validation_error = 'NaN is not allowed'
        return value

    def to_representation(self, value):
        return float(value) if value is not None else None


class ListField(Field):
    expected_types = (list, tuple)

    def __init__(self, child=None, min_length=None, **kwargs):
        self.child = child
        self.min_length = min_length
        super(ListField, self).__init__(**kwargs)

    def coerce(self, value):
        if isinstance(value, str):
            return [item.strip() for item in value.split(',') if item.strip()]
        return value

    def validate(self, value):
        value = super(ListField, self).validate(value)
        if self.validation_error is not None or value is None:
            return value

        if self.min_length is not None and len(value) < self.min_length:
            self.validation_error = 'Must have at least {} items'.format(self.min_length)
            return value

        if self.child is None:
            return tuple(value)

        errors = {}
        data = []
        for index, item in enumerate(value):
            item = self.child.validate(item)
            if self.child.validation_error is not None:
                errors[index] = self.child.validation_error
            data.append(item)
        if errors:
            self.validation_error = errors
        return tuple(data)

    def to_representation(self, value):
        if value is None:
            return None
        if self.child is None:
            return list(value)
        return [self.child.to_representation(item) for item in value]


class MappingField(Field):
    expected_types = dict

    def __init__(self, child=None, **kwargs):
        self.child = child
        super(MappingField, self).__init__(**kwargs)

    def validate(self, value):
        value = super(MappingField, self).validate(value)
        if self.validation_error is not None or value is None or self.child is None:
            return value

        errors = {}
        data = {}
        for key, item in value.items():
            item = self.child.validate(item)
            if self.child.validation_error is not None:
                errors[key] = self.child.validation_error
            data[key] = item
        if errors:
            self.validation_error = errors
        return data

    def to_representation(self, value):
        if value is None:
            return None
        if self.child is None:
            return dict(value)
        return {key: self.child.to_representation(item) for key, item in value.items()}
