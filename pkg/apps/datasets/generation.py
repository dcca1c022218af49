import logging

import numpy as np

from apps.datasets.models import Dataset
from apps.maze.dynamics import reward, sample_start, step
from apps.maze.models import ACTION_DIM, STATE_DIM
from apps.maze.transforms import filter_left_actions
from utils.exceptions import ValidationError

logger = logging.getLogger(__name__)


def generate(spec, policy, episodes, rng, seed=None):
    """Rolls the behaviour policy for ``episodes`` full-horizon episodes.

    Rewards are left at zero; tasks are attached later with :func:`relabel`.
    """
    if episodes <= 0:
        raise ValidationError({'episodes': 'need at least one episode, got {}'.format(episodes)})

    count = episodes * spec.horizon
    states = np.empty((count, STATE_DIM))
    actions = np.empty((count, ACTION_DIM))
    next_states = np.empty((count, STATE_DIM))
    terminals = np.zeros(count, dtype=bool)

    row = 0
    for _ in range(episodes):
        state = sample_start(spec, rng)
        policy.reset(state.as_vector())
        done = False
        while not done:
            vector = state.as_vector()
            action = np.clip(policy(vector), -1.0, 1.0)
            state, done = step(state, action, spec)
            states[row], actions[row], next_states[row] = vector, action, state.as_vector()
            row += 1
        terminals[row - 1] = True

    metadata = {
        'generator': policy.name,
        'seed': seed,
        'episodes': episodes,
        'env_digest': spec.config_digest(),
    }
    logger.info('Generated %d transitions with the %s policy', count, policy.name)
    return Dataset(states, actions, next_states, np.zeros(count), terminals, metadata)


def subsample(dataset, n, rng):
    """``n`` rows drawn uniformly without replacement, in random order."""
    if n > len(dataset):
        raise ValidationError({'subsample': 'cannot draw {} rows from {}'.format(n, len(dataset))})
    if n <= 0:
        raise ValidationError({'subsample': 'must be positive, got {}'.format(n)})
    return dataset.select(rng.permutation(len(dataset))[:n], subsample=int(n))


def relabel(dataset, spec, task):
    rewards = reward(dataset.next_states, task, spec)
    return dataset.with_rewards(rewards, task=task)


def build_dataset(spec, config, policies, exact_subsample=False):
    """Generates, optionally filters and subsamples per a ``DatasetConfig``.

    With ``exact_subsample`` a subsample larger than the generated data is an
    error; otherwise every row is kept and a warning is logged.
    """
    seeds = np.random.SeedSequence(config.seed).spawn(2)
    behaviour_rng, subsample_rng = (np.random.default_rng(s) for s in seeds)
    policy = policies[config.policy](behaviour_rng, spec)
    dataset = generate(spec, policy, config.episodes, behaviour_rng, seed=config.seed)
    if config.filter_left:
        dataset = filter_left_actions(dataset)
    if config.subsample and config.subsample < len(dataset):
        dataset = subsample(dataset, config.subsample, subsample_rng)
    elif config.subsample and config.subsample > len(dataset):
        if exact_subsample:
            raise ValidationError({'subsample': 'requested {} rows but only {} were generated'.format(
                config.subsample, len(dataset))})
        logger.warning('Requested %d rows but only %d exist; keeping all', config.subsample, len(dataset))
    return dataset
