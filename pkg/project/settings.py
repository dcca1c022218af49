import os

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
RUNS_ROOT = os.path.join(BASE_DIR, 'runs')

LOG_FORMAT = '%(levelname)-5.5s [%(name)s] %(message)s'

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


# env
MAZE_DT = 0.05
MAZE_DAMPING = 0.95
MAZE_MAX_SPEED = 1.0
MAZE_GOAL_RADIUS = 0.1
MAZE_HORIZON = 200
MAZE_START_REGION = (0.05, 0.85, 0.15, 0.95)
MAZE_GOALS = {
    'top_left': (0.35, 0.65),
    'top_right': (0.85, 0.85),
    'bottom_left': (0.15, 0.15),
    'bottom_right': (0.85, 0.15),
}
# four rooms split by a cross of walls with one doorway per wall arm
MAZE_WALLS = (
    (0.49, 0.00, 0.51, 0.20),
    (0.49, 0.30, 0.51, 0.70),
    (0.49, 0.80, 0.51, 1.00),
    (0.00, 0.49, 0.20, 0.51),
    (0.30, 0.49, 0.70, 0.51),
    (0.80, 0.49, 1.00, 0.51),
)
OCCUPANCY_BINS = 10

EXPLORE_GAIN = 4.0
EXPLORE_DAMPING_GAIN = 1.0
EXPLORE_NOISE = 0.3
EXPLORE_TIMEOUT = 60


# dataset
DATASET_EPISODES = 100
DATASET_SUBSAMPLE = 20000
FULL_DATASET_SUBSAMPLE = 100000
FBDS_MAGIC = b'FBDS'
FBDS_VERSION = 1
TENSOR_BLOCK_MAGIC = b'FBTB'
TENSOR_BLOCK_VERSION = 1


# model
LATENT_DIM = 32
HIDDEN_DIM = 256
HIDDEN_LAYERS = 2
BACKWARD_HIDDEN_DIM = 256
BACKWARD_HIDDEN_LAYERS = 3
PREPROCESSOR_HIDDEN_DIM = 256
PREPROCESSOR_HIDDEN_LAYERS = 1
EMBEDDING_DIM = 128
ACTOR_NOISE_STD = 0.2
ACTOR_NOISE_CLIP = 0.3


# train
LEARNING_STEPS = 50000
BATCH_SIZE = 256
DISCOUNT = 0.99
LEARNING_RATE = 1e-4
POLYAK = 0.01
Z_MIX_RATIO = 0.5
EVAL_EVERY = 2000
CHECKPOINT_EVERY = 10000
GRAD_CLIP = 1.0
SEED = 0


# penalty
PENALTY_BUDGET = 50.0
OOD_ACTION_SAMPLES = 3
ALPHA_MAX = 1e6
CQL_ALPHA = 0.01
POLICY_DELAY = 2


# eval
EVAL_ROLLOUTS = 10
EVAL_SEEDS = 3
BOOTSTRAP_RESAMPLES = 2000
CONFIDENCE_LEVEL = 0.95
PROFILE_POINTS = 21
Z_INFERENCE_LABELS = 10000
FULL_Z_INFERENCE_LABELS = 100000
DIDACTIC_TASKS = ('top_right', 'bottom_right')
EVAL_WORKERS = 4
PROBE_ROLLOUTS = 100
PROBE_TOLERANCE = 1e-3


# values for --scale full
FULL_SCALE = {
    'dataset': {'subsample': FULL_DATASET_SUBSAMPLE},
    'model': {
        'latent_dim': 100,
        'hidden_dim': 1024,
        'hidden_layers': 2,
        'backward_hidden_dim': 256,
        'backward_hidden_layers': 3,
        'preprocessor_hidden_dim': 1024,
        'preprocessor_hidden_layers': 2,
        'embedding_dim': 512,
    },
    'train': {
        'learning_steps': 1000000,
        'batch_size': 512,
        'eval_every': 20000,
        'checkpoint_every': 100000,
    },
    'eval': {'seeds': 5, 'z_inference_labels': FULL_Z_INFERENCE_LABELS},
}
