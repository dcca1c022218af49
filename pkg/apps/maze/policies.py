import numpy as np

from apps.maze.models import ACTION_DIM
from project import settings


class BehaviourPolicy(object):
    name = None

    def __init__(self, rng):
        self.rng = rng

    def reset(self, state):
        pass

    def __call__(self, state):
        raise NotImplementedError


class RandomPolicy(BehaviourPolicy):
    name = 'random'

    def __call__(self, state):
        return self.rng.uniform(-1.0, 1.0, size=ACTION_DIM)


class WaypointPolicy(BehaviourPolicy):
    """Steers towards random free-space waypoints with a noisy PD controller."""

    name = 'explore'

    def __init__(self, rng, spec, gain=settings.EXPLORE_GAIN, damping_gain=settings.EXPLORE_DAMPING_GAIN,
                 noise=settings.EXPLORE_NOISE, timeout=settings.EXPLORE_TIMEOUT):
        super(WaypointPolicy, self).__init__(rng)
        self.spec = spec
        self.gain = gain
        self.damping_gain = damping_gain
        self.noise = noise
        self.timeout = timeout
        self.waypoint = None
        self.age = 0

    def draw_waypoint(self):
        while True:
            point = self.rng.uniform(0.0, 1.0, size=2)
            if self.spec.is_free(point):
                return point

    def reset(self, state):
        self.waypoint = self.draw_waypoint()
        self.age = 0

    def __call__(self, state):
        state = np.asarray(state, dtype=np.float64)
        if self.waypoint is None:
            self.reset(state)
        position, velocity = state[:2], state[2:4]
        offset = self.waypoint - position
        self.age += 1
        if np.sqrt(offset @ offset) < self.spec.goal_radius / 2 or self.age > self.timeout:
            self.waypoint = self.draw_waypoint()
            self.age = 0
            offset = self.waypoint - position
        action = self.gain * offset - self.damping_gain * velocity + self.rng.normal(0.0, self.noise, size=ACTION_DIM)
        return np.clip(action, -1.0, 1.0)


def behaviour_random(rng):
    return RandomPolicy(rng)


def behaviour_explore(rng, spec):
    return WaypointPolicy(rng, spec)


BEHAVIOUR_POLICIES = {
    RandomPolicy.name: lambda rng, spec: behaviour_random(rng),
    WaypointPolicy.name: behaviour_explore,
}
