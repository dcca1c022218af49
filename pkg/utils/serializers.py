import attr

from utils.exceptions import ValidationError
from utils.fields import (BooleanField, CharField, Empty, Field, FloatField, IntegerField, ListField,
                          MappingField)


class BaseSerializer(Field):
    def __init__(self, data=Empty, **kwargs):
        self.initial_data = data
        self.validated_data = {}
        kwargs.setdefault('default', Empty)
        super(BaseSerializer, self).__init__(required=False, **kwargs)

    @property
    def fields(self):
        return self._serializer_fields

    def __repr__(self):
        return '{cls}'.format(cls=self.__class__)


class SerializerMeta(type):
    def __new__(mcs, name, bases, attrs):
        fields = []
        for field_name, obj in list(attrs.items()):
            if isinstance(obj, Field):
                fields.append((field_name, attrs.pop(field_name)))

        for base in reversed(bases):
            if hasattr(base, '_serializer_fields'):
                fields = [(field_name, obj) for field_name, obj
                          in base._serializer_fields.items()
                          if field_name not in dict(fields)] + fields

        attrs['_serializer_fields'] = dict(fields)
        return super(SerializerMeta, mcs).__new__(mcs, name, bases, attrs)


class Serializer(BaseSerializer, metaclass=SerializerMeta):
    def is_valid(self):
        data = self.initial_data if self.initial_data is not Empty else {}
        value = self.validate(data)
        if self.validation_error is not None:
            raise ValidationError(self.validation_error)
        self.validated_data = value
        return True

    def validate(self, value):
        errors = {}
        data = {}

        if value is Empty or value is None:
            value = {}

        if not isinstance(value, dict):
            self.validation_error = 'Must be dict object'
            return None

        unknown = sorted(set(value) - set(self.fields))
        for field_name in unknown:
            errors[field_name] = 'Unknown field'

        for field_name, field in self.fields.items():
            initial_value = value.get(field_name, Empty)
            field_value = field.validate(initial_value)
            if field.validation_error is not None:
                errors[field_name] = field.validation_error
            else:
                data[field_name] = field_value

        self.validation_error = errors or None
        return data

    def to_json(self, instance):
        json = {}
        for field_name, field in self.fields.items():
            value = instance.get(field_name) if isinstance(instance, dict) else getattr(instance, field_name)
            json_value = field.to_representation(value)
            if json_value is not None:
                json[field_name] = json_value
        return json

    def to_representation(self, value):
        return self.to_json(value) if value is not None else None


class ModelSerializerMeta(SerializerMeta):
    _fields_mapping = {
        int: IntegerField,
        float: FloatField,
        bool: BooleanField,
        str: CharField,
        tuple: ListField,
        list: ListField,
        dict: MappingField,
    }

    def __new__(mcs, name, bases, attrs):
        if name == 'ModelSerializer':
            return super(ModelSerializerMeta, mcs).__new__(mcs, name, bases, attrs)

        try:
            Meta = attrs['Meta']
        except KeyError:
            raise AttributeError('{} have not Meta'.format(name))

        try:
            model = Meta.model
        except AttributeError:
            raise AttributeError('{}.Meta have not model'.format(name))

        meta_exclude = set(getattr(Meta, 'exclude', ()) or ())

        for a in attr.fields(model):
            if a.name in meta_exclude or attrs.get(a.name) is not None:
                continue

            if a.type not in mcs._fields_mapping:
                raise AttributeError('{}: no field for {}.{} of type {}'.format(name, model.__name__, a.name, a.type))

            if a.default is attr.NOTHING:
                default = Empty
            elif isinstance(a.default, attr.Factory):
                default = a.default.factory()
            else:
                default = a.default
            attrs[a.name] = mcs._fields_mapping[a.type](default=default)

        return super(ModelSerializerMeta, mcs).__new__(mcs, name, bases, attrs)


class ModelSerializer(Serializer, metaclass=ModelSerializerMeta):
    """Validates a config section and builds its attrs instance as ``.instance``."""

    def __init__(self, data=Empty, **kwargs):
        self.instance = None
        super(ModelSerializer, self).__init__(data=data, **kwargs)

    def validate(self, value):
        data = super(ModelSerializer, self).validate(value)
        if self.validation_error is None and data is not None:
            try:
                self.instance = self.Meta.model(**data)
            except (TypeError, ValueError, ValidationError) as exc:
                self.validation_error = {'detail': str(exc)}
        return data
