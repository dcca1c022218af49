import numpy as np
import pytest

from apps.fb.losses import (FBBatch, actor_loss, fb_loss, goal_z, infer_z, q_value, sample_z,
                            uniform_sphere)
from apps.fb.models import FBModel, ModelConfig
from tests.gradcheck import check_parameter_gradients
from utils.autodiff import Adam, backward, no_grad
from utils.exceptions import EmptyDataset, ValidationError


def make_batch(n=6, seed=0, latent_dim=4):
    rng = np.random.default_rng(seed)
    return FBBatch(states=rng.uniform(0.0, 1.0, size=(n, 4)), actions=rng.uniform(-1.0, 1.0, size=(n, 2)),
                   next_states=rng.uniform(0.0, 1.0, size=(n, 4)), z=uniform_sphere(n, latent_dim, rng),
                   permutation=rng.permutation(n))


def zero_forward(model):
    for module in (model.forward, model.forward_target):
        for param in module.parameters():
            param.data = np.zeros_like(param.data)


def loss_value(model, batch, discount=0.9):
    with no_grad():
        return fb_loss(model, batch, discount).loss.item()


def test_successor_mask_marks_each_rows_own_next_state():
    batch = make_batch()
    mask = batch.successor_mask()
    assert mask.sum() == batch.size
    assert np.array_equal(mask.sum(axis=0), np.ones(batch.size))
    for i in range(batch.size):
        (column,) = np.flatnonzero(mask[i])
        assert np.array_equal(batch.future_states[column], batch.next_states[i])


def test_zero_forward_gives_zero_loss(fb_model):
    zero_forward(fb_model)
    assert loss_value(fb_model, make_batch()) == 0.0


def test_loss_diagnostics(fb_model):
    result = fb_loss(fb_model, make_batch(), 0.9)
    assert set(result.diagnostics) >= {'fb_offdiag_1', 'fb_diag_2', 'target_measure_mean'}
    assert result.loss.item() == pytest.approx(sum(
        result.diagnostics['fb_offdiag_{}'.format(h)] - 2.0 * result.diagnostics['fb_diag_{}'.format(h)]
        for h in (1, 2)))


@pytest.mark.parametrize('discount', [0.0, 1.0])
def test_discount_must_lie_in_open_interval(fb_model, discount):
    with pytest.raises(ValidationError):
        fb_loss(fb_model, make_batch(), discount)


@pytest.mark.parametrize('name', ['forward.head1.out.weight', 'forward.sz.hidden0.bias',
                                  'backward.net.out.weight', 'backward.net.norm.gain'])
def test_loss_gradients_match_finite_differences(fb_model, name):
    batch = make_batch()
    param = dict(fb_model.named_parameters())[name]
    check_parameter_gradients(lambda: fb_loss(fb_model, batch, 0.9).loss, [(name, param)])


def test_actor_loss_gradients_match_finite_differences(fb_model):
    batch = make_batch()
    noise = np.zeros((batch.size, 2))
    params = dict(fb_model.named_parameters())
    names = ['actor.head.out.weight', 'actor.sz.hidden0.bias', 'actor.s.norm.gain']
    check_parameter_gradients(lambda: actor_loss(fb_model, batch, noise), [(n, params[n]) for n in names])


def test_targets_receive_no_gradient(fb_model):
    backward(fb_loss(fb_model, make_batch(), 0.9).loss)
    assert all(p.grad is None for p in fb_model.forward_target.parameters())
    assert all(p.grad is None for p in fb_model.backward_target.parameters())
    assert all(p.grad is None for p in fb_model.actor.parameters())


def test_actor_loss_only_reaches_actor(fb_model):
    batch = make_batch()
    backward(actor_loss(fb_model, batch, np.zeros((batch.size, 2))))
    assert all(p.grad is not None for p in fb_model.actor.parameters())
    assert all(p.grad is None for p in fb_model.forward.parameters())


def test_uniform_sphere_radius(rng):
    draws = uniform_sphere(100, 9, rng)
    assert np.linalg.norm(draws, axis=1) == pytest.approx(np.full(100, 3.0))
    assert np.abs(draws.mean(axis=0)).max() < 1.0


@pytest.mark.parametrize('d', [4, 16])
def test_uniform_draws_are_isotropic_on_the_sphere(fb_model, rng, d):
    z = sample_z(100000, d, None, fb_model.backward, 1.0, rng)
    assert np.linalg.norm(z, axis=1) == pytest.approx(np.full(len(z), np.sqrt(d)))
    assert np.abs(z.mean(axis=0)).max() < 0.02
    assert np.abs(np.cov(z, rowvar=False) - np.eye(d)).max() < 0.05


def test_sample_z_mixes_uniform_and_backward_draws(fb_model, rng):
    states = rng.uniform(0.0, 1.0, size=(5, 4))
    z = sample_z(7, 4, states, fb_model.backward, 0.5, rng)
    assert z.shape == (7, 4)
    assert np.linalg.norm(z, axis=1) == pytest.approx(np.full(7, 2.0))
    with no_grad():
        embedded = fb_model.backward(states).data
    # the last three rows are B of batch states
    for row in z[4:]:
        assert np.isclose(embedded, row).all(axis=1).any()


def test_sample_z_rejects_bad_ratio(fb_model, rng):
    with pytest.raises(ValidationError):
        sample_z(4, 4, np.zeros((2, 4)), fb_model.backward, 1.5, rng)


def test_infer_z_weights_by_reward(fb_model, rng):
    states = rng.uniform(0.0, 1.0, size=(4, 4))
    rewards = np.array([1.0, 0.0, 0.5, 0.0])
    with no_grad():
        embedded = fb_model.backward(states).data
    z = infer_z(fb_model.backward, states, rewards)
    assert z == pytest.approx((embedded[0] + 0.5 * embedded[2]) / 4.0)
    projected = infer_z(fb_model.backward, states, rewards, project=True)
    assert np.linalg.norm(projected) == pytest.approx(2.0)


def test_infer_z_needs_labels(fb_model):
    with pytest.raises(EmptyDataset):
        infer_z(fb_model.backward, np.zeros((0, 4)), np.zeros(0))


def test_goal_z_is_backward_of_goal(fb_model):
    goal = np.array([0.85, 0.85, 0.0, 0.0])
    with no_grad():
        assert goal_z(fb_model.backward, goal) == pytest.approx(fb_model.backward(goal).data[0])


def test_q_value_broadcasts_single_latent(fb_model):
    z = uniform_sphere(1, 4, np.random.default_rng(0))[0]
    values = q_value(fb_model, np.zeros((3, 4)), np.zeros((3, 2)), z)
    assert values.shape == (3,)
    assert values == pytest.approx(np.full(3, values[0]))


@pytest.mark.slow
def test_chain_successor_measures(chain_dataset):
    """F^T B recovers the discounted occupancy over the data density on the three-state chain."""
    copies = 20
    eye = np.eye(3)
    states = np.tile(chain_dataset.states, (copies, 1))
    next_states = np.tile(chain_dataset.next_states, (copies, 1))
    actions = np.tile(chain_dataset.actions, (copies, 1))
    config = ModelConfig(latent_dim=4, hidden_dim=32, hidden_layers=1, backward_hidden_dim=32,
                         backward_hidden_layers=1, preprocessor_hidden_dim=32, preprocessor_hidden_layers=1,
                         embedding_dim=16)
    model = FBModel(config, 3, 1, np.random.default_rng(0), polyak=0.05)
    # an actor fixed at zero keeps next actions on the data
    for param in model.actor.parameters():
        param.data = np.zeros_like(param.data)
    optimizer = Adam(model.online_parameters('forward', 'backward'), lr=3e-3)

    rng = np.random.default_rng(1)
    z = np.tile(uniform_sphere(1, 4, rng), (len(states), 1))
    for _ in range(5000):
        batch = FBBatch(states=states, actions=actions, next_states=next_states, z=z,
                        permutation=rng.permutation(len(states)))
        optimizer.zero_grad()
        backward(fb_loss(model, batch, 0.5).loss)
        optimizer.step()
        model.polyak_update()

    with no_grad():
        forward, _ = model.forward(eye, np.zeros((3, 1)), z[:3])
        measure = forward.data @ model.backward(eye).data.T
    # data density: state 1 a third of the time, state 2 two thirds; state 0 is never a
    # successor, so its column carries no training signal
    expected = np.array([[3.0, 1.5], [0.0, 3.0], [0.0, 3.0]])
    assert measure[:, 1:] == pytest.approx(expected, rel=0.05, abs=0.1)
