from apps.baselines.models import BaselineConfig
from utils import serializers
from utils.fields import BooleanField, CharField, FloatField, IntegerField

_default = BaselineConfig()


class BaselineConfigSerializer(serializers.ModelSerializer):
    task = CharField(default=_default.task)
    hidden_dim = IntegerField(min_value=1, default=_default.hidden_dim)
    hidden_layers = IntegerField(min_value=1, default=_default.hidden_layers)
    cql_alpha = FloatField(min_value=0.0, default=_default.cql_alpha)
    lagrange = BooleanField(default=False)
    policy_delay = IntegerField(min_value=1, default=_default.policy_delay)

    class Meta:
        model = BaselineConfig
