from apps.maze.models import MazeSpec
from utils import serializers
from utils.fields import FloatField, IntegerField, ListField, MappingField

_default = MazeSpec()


def _coordinates(min_length, **kwargs):
    return ListField(child=FloatField(min_value=0.0, max_value=1.0), min_length=min_length, **kwargs)


class MazeSpecSerializer(serializers.ModelSerializer):
    walls = ListField(child=_coordinates(4), default=[list(w) for w in _default.walls])
    dt = FloatField(min_value=0.0, min_exclusive=True, default=_default.dt)
    damping = FloatField(min_value=0.0, max_value=1.0, default=_default.damping)
    max_speed = FloatField(min_value=0.0, min_exclusive=True, default=_default.max_speed)
    goals = MappingField(child=_coordinates(2), default={k: list(v) for k, v in _default.goals.items()})
    goal_radius = FloatField(min_value=0.0, min_exclusive=True, default=_default.goal_radius)
    horizon = IntegerField(min_value=1, default=_default.horizon)
    start_region = _coordinates(4, default=list(_default.start_region))

    class Meta:
        model = MazeSpec
