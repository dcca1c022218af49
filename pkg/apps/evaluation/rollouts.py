import copy
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from apps.datasets.generation import relabel
from apps.fb.losses import goal_z, infer_z, q_value
from apps.fb.models import FBModel, act
from apps.maze.dynamics import MazeEnv
from apps.maze.models import goal_state
from utils.exceptions import ValidationError

logger = logging.getLogger(__name__)


class TaskPolicy(object):
    def act(self, states):
        raise NotImplementedError

    def q_values(self, states, actions):
        raise NotImplementedError


class FBTaskPolicy(TaskPolicy):
    """The zero-shot policy pi_z with z fixed for one task."""

    def __init__(self, model, z):
        self.model = model
        self.z = np.asarray(z, dtype=np.float64)

    def _z_rows(self, count):
        return np.broadcast_to(self.z, (count, self.z.shape[0]))

    def act(self, states):
        states = np.atleast_2d(states)
        return act(self.model, states, self._z_rows(len(states)))

    def q_values(self, states, actions):
        return q_value(self.model, states, actions, self.z)


def task_z(model, task, spec, config, dataset=None, rng=None):
    if config.z_source == 'goal':
        return goal_z(model.backward, goal_state(spec, task))
    if dataset is None:
        raise ValidationError({'z_source': 'inferred task vectors need a dataset'})
    rng = rng if rng is not None else np.random.default_rng()
    labelled = relabel(dataset, spec, task)
    rows = rng.choice(len(labelled), size=min(config.z_inference_labels, len(labelled)), replace=False)
    return infer_z(model.backward, labelled.next_states[rows], labelled.rewards[rows],
                   project=config.project_inferred_z)


def task_policy(model, task, spec, config, dataset=None, rng=None):
    if isinstance(model, FBModel):
        return FBTaskPolicy(model, task_z(model, task, spec, config, dataset, rng))
    if getattr(model, 'task', task) != task:
        logger.warning('Single-task agent trained for "%s" evaluated on "%s"', model.task, task)
    return model


def rollout(policy, spec, task, n, seed):
    """Undiscounted returns of ``n`` episodes stepped in lockstep."""
    base = [int(s) for s in np.atleast_1d(seed)]
    envs = [MazeEnv(spec, task, np.random.default_rng(np.random.SeedSequence(base + [i]))) for i in range(n)]
    states = np.stack([env.reset() for env in envs])
    returns = np.zeros(n)
    done = False
    while not done:
        actions = policy.act(states)
        for i, env in enumerate(envs):
            states[i], r, done = env.step(actions[i])
            returns[i] += r
    return returns.tolist()


def evaluate_tasks(model, spec, config, seed, step=0, dataset=None, tasks=None):
    """Returns {task: [returns]} from rollouts on a frozen copy of ``model``."""
    snapshot = copy.deepcopy(model)
    tasks = list(tasks if tasks is not None else config.tasks)

    def run(index_task):
        index, task = index_task
        rng = np.random.default_rng(np.random.SeedSequence([seed, step, index, 1]))
        policy = task_policy(snapshot, task, spec, config, dataset, rng)
        return rollout(policy, spec, task, config.rollouts, [seed, step, index])

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        results = list(pool.map(run, enumerate(tasks)))
    return dict(zip(tasks, results))
