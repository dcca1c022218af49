from apps.datasets.models import DatasetConfig
from apps.maze.policies import BEHAVIOUR_POLICIES
from utils import serializers
from utils.fields import BooleanField, CharField, ChoiceField, FloatField, IntegerField


class DatasetConfigSerializer(serializers.ModelSerializer):
    policy = ChoiceField(choices=sorted(BEHAVIOUR_POLICIES), default='explore')
    episodes = IntegerField(min_value=1, default=DatasetConfig().episodes)
    subsample = IntegerField(min_value=0, default=DatasetConfig().subsample,
                             help_text='rows kept after generation; 0 keeps every row')
    filter_left = BooleanField(default=False)

    class Meta:
        model = DatasetConfig


class DatasetSummarySerializer(serializers.Serializer):
    rows = IntegerField()
    state_dim = IntegerField()
    action_dim = IntegerField()
    coverage = FloatField()
    generator = CharField(allow_null=True)
    seed = IntegerField(allow_null=True)
