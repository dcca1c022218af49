import pytest

from project import settings
from project.configuration import (build_config, load_config, load_run_config, merge, parse_overrides,
                                   read_toml)
from tests.factories import tiny_config_data
from utils.exceptions import StorageError, ValidationError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'config.toml'
    path.write_text('[train]\nseed = 5\nbatch_size = 64\n\n[model]\nlatent_dim = 16\n')
    return path


def test_defaults_come_from_settings():
    config = load_config()
    assert config.env.horizon == settings.MAZE_HORIZON
    assert config.model.latent_dim == settings.LATENT_DIM
    assert config.train.learning_steps == settings.LEARNING_STEPS
    assert config.penalty.variant == 'none' and config.penalty.tuned
    assert config.eval.tasks == sorted(settings.MAZE_GOALS)
    assert config.baseline.cql_alpha == settings.CQL_ALPHA


def test_full_scale():
    config = load_config(scale='full')
    assert config.model.latent_dim == 100
    assert config.train.learning_steps == 1000000
    assert config.dataset.subsample == settings.FULL_DATASET_SUBSAMPLE
    assert config.eval.seeds == 5


def test_unknown_scale():
    with pytest.raises(ValidationError):
        load_config(scale='huge')


def test_file_beats_scale_and_overrides_beat_file(config_file):
    config = load_config(config_file, parse_overrides(['train.seed=9']), scale='full')
    assert config.train.seed == 9
    assert config.train.batch_size == 64
    assert config.model.latent_dim == 16
    assert config.model.hidden_dim == 1024


def test_override_strings_are_coerced():
    overrides = parse_overrides(['penalty.fixed_alpha=0', 'dataset.filter_left=true',
                                 'eval.tasks=top_right, bottom_left', 'train.discount=0.9'])
    config = load_config(overrides=overrides)
    assert config.penalty.fixed_alpha == 0.0 and not config.penalty.tuned
    assert config.dataset.filter_left is True
    assert config.eval.tasks == ['top_right', 'bottom_left']
    assert config.train.discount == 0.9


@pytest.mark.parametrize('pair', ['train.seed', 'seed=3', 'train.=3'])
def test_malformed_override(pair):
    with pytest.raises(ValidationError):
        parse_overrides([pair])


def test_errors_from_every_section_are_collected():
    data = tiny_config_data(train={'batch_size': 1, 'discount': 1.0}, penalty={'variant': 'cql'},
                            extra={'x': 1})
    with pytest.raises(ValidationError) as info:
        build_config(data)
    errors = info.value.data
    assert set(errors) == {'train', 'penalty', 'extra'}
    assert set(errors['train']) == {'batch_size', 'discount'}
    assert info.value.exit_code == 2


def test_unknown_field_is_an_error():
    with pytest.raises(ValidationError) as info:
        build_config({'model': {'latent': 3}})
    assert info.value.data == {'model': {'latent': 'Unknown field'}}


def test_tasks_must_be_maze_goals():
    with pytest.raises(ValidationError) as info:
        build_config(tiny_config_data(eval={'tasks': ['top_right', 'centre']}, baseline={'task': 'nowhere'}))
    assert set(info.value.data) == {'eval', 'baseline'}
    assert 'centre' in info.value.data['eval']['tasks']


def test_written_config_reads_back(tmp_path, tiny_config):
    tiny_config.write(tmp_path)
    loaded = load_run_config(tmp_path)
    assert loaded.to_dict() == tiny_config.to_dict()
    assert loaded.digest() == tiny_config.digest()


def test_digest_follows_content(tiny_config):
    assert tiny_config.digest() == build_config(tiny_config_data()).digest()
    assert tiny_config.digest() != tiny_config.replace(train={'seed': 1}).digest()


def test_replace_keeps_other_fields(tiny_config):
    replaced = tiny_config.replace(penalty={'variant': 'mc'})
    assert replaced.penalty.variant == 'mc'
    assert replaced.penalty.n_uniform == tiny_config.penalty.n_uniform
    assert replaced.model == tiny_config.model
    assert tiny_config.penalty.variant == 'none'


def test_replace_is_validated(tiny_config):
    with pytest.raises(ValidationError):
        tiny_config.replace(train={'learning_rate': 0.0})


def test_missing_run_config(tmp_path):
    with pytest.raises(StorageError):
        load_run_config(tmp_path)


def test_unreadable_toml(tmp_path):
    path = tmp_path / 'bad.toml'
    path.write_text('[train\nseed = ')
    with pytest.raises(ValidationError):
        read_toml(path)
    with pytest.raises(StorageError):
        read_toml(tmp_path / 'absent.toml')


def test_merge_is_recursive():
    base = {'train': {'seed': 1, 'batch_size': 8}, 'model': {'latent_dim': 4}}
    merge(base, {'train': {'seed': 2}, 'eval': {'rollouts': 3}})
    assert base == {'train': {'seed': 2, 'batch_size': 8}, 'model': {'latent_dim': 4}, 'eval': {'rollouts': 3}}
