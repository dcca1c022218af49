"""Small configurations that train in a fraction of a second."""

TINY_MODEL = {
    'latent_dim': 4,
    'hidden_dim': 16,
    'hidden_layers': 1,
    'backward_hidden_dim': 16,
    'backward_hidden_layers': 1,
    'preprocessor_hidden_dim': 16,
    'preprocessor_hidden_layers': 1,
    'embedding_dim': 8,
}


def tiny_config_data(**sections):
    data = {
        'env': {'horizon': 20},
        'dataset': {'policy': 'random', 'episodes': 4, 'subsample': 0},
        'model': dict(TINY_MODEL),
        'train': {'learning_steps': 6, 'batch_size': 8, 'eval_every': 3, 'checkpoint_every': 3,
                  'learning_rate': 1e-3},
        'penalty': {'n_uniform': 2, 'n_policy_current': 2, 'n_policy_next': 2},
        'eval': {'rollouts': 2, 'bootstrap_resamples': 50, 'tasks': ['top_right'], 'workers': 1,
                 'z_inference_labels': 50, 'probe_rollouts': 4},
    }
    for name, values in sections.items():
        data.setdefault(name, {}).update(values)
    return data
