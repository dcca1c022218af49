from apps.fb.models import VARIANTS, ModelConfig, PenaltyConfig, TrainConfig
from utils import serializers
from utils.fields import BooleanField, ChoiceField, FloatField, IntegerField


def _positive_int(default):
    return IntegerField(min_value=1, default=default)


class ModelConfigSerializer(serializers.ModelSerializer):
    latent_dim = _positive_int(ModelConfig().latent_dim)
    hidden_dim = _positive_int(ModelConfig().hidden_dim)
    hidden_layers = _positive_int(ModelConfig().hidden_layers)
    backward_hidden_dim = _positive_int(ModelConfig().backward_hidden_dim)
    backward_hidden_layers = _positive_int(ModelConfig().backward_hidden_layers)
    preprocessor_hidden_dim = _positive_int(ModelConfig().preprocessor_hidden_dim)
    preprocessor_hidden_layers = _positive_int(ModelConfig().preprocessor_hidden_layers)
    embedding_dim = _positive_int(ModelConfig().embedding_dim)
    actor_noise_std = FloatField(min_value=0.0, default=ModelConfig().actor_noise_std)
    actor_noise_clip = FloatField(min_value=0.0, default=ModelConfig().actor_noise_clip)

    class Meta:
        model = ModelConfig


class TrainConfigSerializer(serializers.ModelSerializer):
    learning_steps = _positive_int(TrainConfig().learning_steps)
    batch_size = IntegerField(min_value=2, default=TrainConfig().batch_size)
    discount = FloatField(min_value=0.0, max_value=1.0, min_exclusive=True, max_exclusive=True,
                          default=TrainConfig().discount)
    learning_rate = FloatField(min_value=0.0, min_exclusive=True, default=TrainConfig().learning_rate)
    polyak = FloatField(min_value=0.0, max_value=1.0, min_exclusive=True, default=TrainConfig().polyak)
    z_mix_ratio = FloatField(min_value=0.0, max_value=1.0, default=TrainConfig().z_mix_ratio)
    eval_every = _positive_int(TrainConfig().eval_every)
    checkpoint_every = _positive_int(TrainConfig().checkpoint_every)
    grad_clip = FloatField(min_value=0.0, min_exclusive=True, default=TrainConfig().grad_clip)

    class Meta:
        model = TrainConfig


class PenaltyConfigSerializer(serializers.ModelSerializer):
    variant = ChoiceField(choices=VARIANTS, default='none')
    budget = FloatField(min_value=0.0, default=PenaltyConfig().budget)
    n_uniform = IntegerField(min_value=0, default=PenaltyConfig().n_uniform)
    n_policy_current = IntegerField(min_value=0, default=PenaltyConfig().n_policy_current)
    n_policy_next = IntegerField(min_value=0, default=PenaltyConfig().n_policy_next)
    include_dataset_action = BooleanField(default=True)
    alpha_max = FloatField(min_value=0.0, default=PenaltyConfig().alpha_max)
    fixed_alpha = FloatField(default=PenaltyConfig().fixed_alpha,
                             help_text='weight used instead of dual tuning when >= 0')

    class Meta:
        model = PenaltyConfig
