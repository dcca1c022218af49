import math

import attr
import numpy as np

from apps.evaluation.rollouts import task_policy
from apps.maze.dynamics import MazeEnv
from project import settings


@attr.s
class ProbeResult(object):
    predicted = attr.ib(type=float)
    empirical = attr.ib(type=float)
    gap = attr.ib(type=float)
    rollouts = attr.ib(type=int)

    def as_dict(self):
        return attr.asdict(self)


def probe_horizon(discount, tolerance=settings.PROBE_TOLERANCE):
    """Steps after which the discount weight falls below ``tolerance``."""
    return int(math.ceil(math.log(tolerance) / math.log(discount)))


def discounted_return(env, policy, state, action, discount, horizon):
    """Takes ``action`` from ``state`` then follows ``policy``; time-limit ends are ignored."""
    env.reset(state)
    observation, total, _ = env.step(action)
    weight = 1.0
    for _ in range(1, horizon):
        weight *= discount
        observation, r, _ = env.step(policy.act(np.atleast_2d(observation))[0])
        total += weight * r
    return total


def q_overestimation_probe(policy, dataset, env, n_rollouts, discount, rng, horizon=None):
    """Mean predicted Q over dataset pairs against discounted returns from the same pairs."""
    horizon = horizon or probe_horizon(discount)
    rows = rng.choice(len(dataset), size=n_rollouts, replace=n_rollouts > len(dataset))
    states, actions = dataset.states[rows], dataset.actions[rows]
    predicted = float(np.mean(policy.q_values(states, actions)))
    empirical = float(np.mean([discounted_return(env, policy, s, a, discount, horizon)
                               for s, a in zip(states, actions)]))
    return ProbeResult(predicted=predicted, empirical=empirical, gap=predicted - empirical, rollouts=n_rollouts)


def diagnose_agent(agent, dataset, task, config, seed):
    """Overestimation of ``agent`` on ``task`` from pairs of ``dataset``.

    FB agents act and are scored under the task vector inferred from the
    dataset relabelled for ``task``, so predicted Q is on the same reward scale
    as the rolled-out returns.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    eval_cfg = attr.evolve(config.eval, z_source='inferred')
    policy = task_policy(agent, task, config.env, eval_cfg, dataset, rng)
    env = MazeEnv(config.env, task, rng)
    return q_overestimation_probe(policy, dataset, env, config.eval.probe_rollouts, config.train.discount, rng)
