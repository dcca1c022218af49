from apps.evaluation.models import Z_SOURCES, EvalConfig
from utils import serializers
from utils.fields import BooleanField, CharField, ChoiceField, FloatField, IntegerField, ListField

_default = EvalConfig()


class EvalConfigSerializer(serializers.ModelSerializer):
    rollouts = IntegerField(min_value=1, default=_default.rollouts)
    seeds = IntegerField(min_value=1, default=_default.seeds)
    tasks = ListField(child=CharField(), min_length=1, default=_default.tasks)
    bootstrap_resamples = IntegerField(min_value=1, default=_default.bootstrap_resamples)
    confidence = FloatField(min_value=0.0, max_value=1.0, min_exclusive=True, max_exclusive=True,
                            default=_default.confidence)
    z_source = ChoiceField(choices=Z_SOURCES, default=_default.z_source)
    z_inference_labels = IntegerField(min_value=1, default=_default.z_inference_labels)
    project_inferred_z = BooleanField(default=False)
    probe_rollouts = IntegerField(min_value=1, default=_default.probe_rollouts)
    workers = IntegerField(min_value=1, default=_default.workers)

    class Meta:
        model = EvalConfig
