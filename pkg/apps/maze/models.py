import attr
import numpy as np

from project import settings
from utils.exceptions import UnknownTask, ValidationError

STATE_DIM = 4
ACTION_DIM = 2


def _walls(value):
    return tuple(tuple(float(c) for c in wall) for wall in value)


def _goals(value):
    return {str(name): tuple(float(c) for c in point) for name, point in dict(value).items()}


def _region(value):
    return tuple(float(c) for c in value)


@attr.s(frozen=True)
class MazeSpec(object):
    """Four-room point-mass maze on the unit square.

    Walls are axis-aligned rectangles ``(x0, y0, x1, y1)``; y grows upwards,
    so "top" rooms have y > 0.5.
    """

    walls = attr.ib(default=settings.MAZE_WALLS, converter=_walls, type=tuple)
    dt = attr.ib(default=settings.MAZE_DT, type=float)
    damping = attr.ib(default=settings.MAZE_DAMPING, type=float)
    max_speed = attr.ib(default=settings.MAZE_MAX_SPEED, type=float)
    goals = attr.ib(default=attr.Factory(lambda: dict(settings.MAZE_GOALS)), converter=_goals, type=dict)
    goal_radius = attr.ib(default=settings.MAZE_GOAL_RADIUS, type=float)
    horizon = attr.ib(default=settings.MAZE_HORIZON, type=int)
    start_region = attr.ib(default=settings.MAZE_START_REGION, converter=_region, type=tuple)

    def __attrs_post_init__(self):
        for wall in self.walls:
            if len(wall) != 4 or wall[0] >= wall[2] or wall[1] >= wall[3]:
                raise ValidationError({'walls': 'bad wall rectangle {}'.format(wall)})
        for name, goal in self.goals.items():
            if len(goal) != 2 or not self.is_free(goal):
                raise ValidationError({'goals': 'goal "{}" at {} is not in free space'.format(name, goal)})
        x0, y0, x1, y1 = self.start_region
        corners = ((x0, y0), (x0, y1), (x1, y0), (x1, y1))
        if x0 > x1 or y0 > y1 or not all(self.is_free(c) and c[0] < 0.5 < c[1] for c in corners):
            raise ValidationError({'start_region': 'must lie in free space of the top-left room'})

    @property
    def tasks(self):
        return tuple(sorted(self.goals))

    def goal(self, task):
        try:
            return np.asarray(self.goals[task], dtype=np.float64)
        except KeyError:
            raise UnknownTask(task, self.goals)

    def is_free(self, point):
        x, y = point
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            return False
        return not any(x0 <= x <= x1 and y0 <= y <= y1 for x0, y0, x1, y1 in self.walls)

    def config_digest(self):
        from utils.hash import hash_config
        return hash_config(attr.asdict(self))


@attr.s
class MazeState(object):
    position = attr.ib(converter=lambda v: np.array(v, dtype=np.float64))
    velocity = attr.ib(converter=lambda v: np.array(v, dtype=np.float64))
    t = attr.ib(default=0)

    def as_vector(self):
        return np.concatenate([self.position, self.velocity])

    @classmethod
    def from_vector(cls, vector, t=0):
        vector = np.asarray(vector, dtype=np.float64)
        return cls(position=vector[:2], velocity=vector[2:4], t=t)

    def copy(self):
        return MazeState(self.position.copy(), self.velocity.copy(), self.t)


def clamp_action(action):
    action = np.asarray(action, dtype=np.float64)
    if action.shape != (ACTION_DIM,):
        raise ValidationError('maze actions are {}-dimensional, got shape {}'.format(ACTION_DIM, action.shape))
    return np.clip(action, -1.0, 1.0)


def goal_state(spec, task):
    """The state vector resting at the goal, used as the goal-reaching task input."""
    return np.concatenate([spec.goal(task), np.zeros(2)])
