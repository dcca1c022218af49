import numpy as np

from apps.maze.models import MazeState, clamp_action


def _blocked(spec, position, proposed, axis):
    if not 0.0 <= proposed[axis] <= 1.0:
        return True
    other = 1 - axis
    low, high = sorted((position[axis], proposed[axis]))
    for wall in spec.walls:
        w_low, w_high = wall[axis], wall[axis + 2]
        o_low, o_high = wall[other], wall[other + 2]
        if o_low <= position[other] <= o_high and low <= w_high and high >= w_low:
            return True
    return False


def step(state, action, spec):
    """Advances the point mass one tick.

    Velocity is damped, pushed by the tilt and speed-clamped; the position
    then moves one axis at a time, and a move that would sweep through a
    wall is dropped together with that axis' velocity.
    """
    action = clamp_action(action)
    velocity = spec.damping * state.velocity + spec.dt * action
    speed = np.sqrt(velocity @ velocity)
    if speed > spec.max_speed:
        velocity = velocity * (spec.max_speed / speed)

    position = state.position.copy()
    for axis in (0, 1):
        proposed = position.copy()
        proposed[axis] += spec.dt * velocity[axis]
        if _blocked(spec, position, proposed, axis):
            velocity[axis] = 0.0
        else:
            position = proposed

    t = state.t + 1
    return MazeState(position, velocity, t), t >= spec.horizon


def reward(next_state, task, spec):
    position = next_state.position if isinstance(next_state, MazeState) else np.asarray(next_state)[..., :2]
    distance = np.sqrt(((position - spec.goal(task)) ** 2).sum(axis=-1))
    return np.maximum(0.0, 1.0 - distance / spec.goal_radius)


def sample_start(spec, rng):
    x0, y0, x1, y1 = spec.start_region
    return MazeState(position=[rng.uniform(x0, x1), rng.uniform(y0, y1)], velocity=[0.0, 0.0])


class MazeEnv(object):
    def __init__(self, spec, task=None, rng=None):
        self.spec = spec
        self.task = task
        self.rng = rng if rng is not None else np.random.default_rng()
        self.state = None
        if task is not None:
            spec.goal(task)

    def reset(self, state=None):
        if state is None:
            self.state = sample_start(self.spec, self.rng)
        elif isinstance(state, MazeState):
            self.state = state.copy()
        else:
            self.state = MazeState.from_vector(state)
        return self.state.as_vector()

    def step(self, action):
        self.state, done = step(self.state, action, self.spec)
        r = float(reward(self.state, self.task, self.spec)) if self.task is not None else 0.0
        return self.state.as_vector(), r, done
