import numpy as np
import pytest

from apps.baselines.models import BaselineConfig, Critic
from apps.fb.conservative import (AlphaState, alpha_loss, build_action_sample_set, cql_penalty, mc_penalty,
                                  sample_actions, tune_alpha, vc_penalty)
from apps.fb.losses import FBBatch, uniform_sphere
from apps.fb.models import PenaltyConfig
from tests.gradcheck import check_parameter_gradients
from utils.autodiff import Adam, Tensor, backward, no_grad
from utils.exceptions import ValidationError

PENALTY = PenaltyConfig(variant='vc', n_uniform=2, n_policy_current=3, n_policy_next=2)


def make_batch(n=5, seed=0):
    rng = np.random.default_rng(seed)
    return FBBatch(states=rng.uniform(0.0, 1.0, size=(n, 4)), actions=rng.uniform(-1.0, 1.0, size=(n, 2)),
                   next_states=rng.uniform(0.0, 1.0, size=(n, 4)), z=uniform_sphere(n, 4, rng),
                   permutation=rng.permutation(n))


def penalty_inputs(model, batch, cfg=PENALTY, seed=1):
    samples = build_action_sample_set(model, batch, cfg, np.random.default_rng(seed))
    forward_data = model.forward(batch.states, batch.actions, batch.z)
    return samples, forward_data


def test_sample_set_shapes(fb_model):
    batch = make_batch()
    samples, _ = penalty_inputs(fb_model, batch)
    assert samples.uniform.shape == (5, 2, 2)
    assert samples.current.shape == (5, 3, 2)
    assert samples.following.shape == (5, 2, 2)
    assert samples.size == PENALTY.samples_per_row == 10
    assert np.abs(samples.sampled).max() <= 1.0


def test_equal_values_give_log_of_sample_count(fb_model):
    for param in fb_model.forward.parameters():
        param.data = np.zeros_like(param.data)
    batch = make_batch()
    samples, forward_data = penalty_inputs(fb_model, batch)
    result = vc_penalty(fb_model, batch, samples, forward_data)
    # one ln K per forward head
    assert result.penalty.item() == pytest.approx(2.0 * np.log(samples.size))
    assert result.q_data_mean == result.q_ood_mean == 0.0


@pytest.mark.parametrize('seed', range(5))
def test_penalties_are_non_negative(fb_model, seed):
    batch = make_batch(seed=seed)
    samples, forward_data = penalty_inputs(fb_model, batch, seed=seed)
    assert vc_penalty(fb_model, batch, samples, forward_data).penalty.item() >= 0.0
    future = fb_model.backward(batch.future_states)
    assert mc_penalty(fb_model, batch, samples, forward_data, future).penalty.item() >= 0.0


def test_measure_penalty_with_latent_as_future_is_value_penalty(fb_model):
    batch = make_batch(n=1)
    samples, forward_data = penalty_inputs(fb_model, batch)
    value = vc_penalty(fb_model, batch, samples, forward_data).penalty.item()
    measure = mc_penalty(fb_model, batch, samples, forward_data, Tensor(batch.z)).penalty.item()
    assert measure == pytest.approx(value)


def test_penalty_without_dataset_column(fb_model):
    cfg = PenaltyConfig(variant='vc', n_uniform=1, n_policy_current=1, n_policy_next=1,
                        include_dataset_action=False)
    batch = make_batch()
    samples, forward_data = penalty_inputs(fb_model, batch, cfg)
    assert samples.size == 3
    assert np.isfinite(vc_penalty(fb_model, batch, samples, forward_data).penalty.item())


def test_penalty_gradients_reach_forward_only(fb_model):
    batch = make_batch()
    samples, forward_data = penalty_inputs(fb_model, batch)
    backward(vc_penalty(fb_model, batch, samples, forward_data).penalty)
    assert all(p.grad is not None for p in fb_model.forward.parameters())
    assert all(p.grad is None for p in fb_model.actor.parameters())


def test_cql_penalty_of_flat_critic():
    config = BaselineConfig(hidden_dim=8, hidden_layers=1)
    critic = Critic(config, 4, 2, np.random.default_rng(0))
    for param in critic.parameters():
        param.data = np.zeros_like(param.data)
    batch = make_batch()
    samples = noisy_zero_samples(batch)
    result = cql_penalty(critic, batch.states, batch.actions, samples)
    assert result.penalty.item() == pytest.approx(2.0 * np.log(samples.size))


def noisy_zero_samples(batch):
    def policy(states, repeats, noise):
        return np.clip(np.zeros((len(states) * repeats, 2)) + 0.1 * noise, -1.0, 1.0)

    return sample_actions(policy, batch.states, batch.next_states, 2, PENALTY, np.random.default_rng(0))


def test_alpha_rises_while_penalty_exceeds_budget():
    state = AlphaState(lr=0.1, alpha_max=100.0)
    alphas = [tune_alpha(state, penalty=20.0, budget=5.0) for _ in range(5)]
    assert alphas[0] > 1.0
    assert all(b > a for a, b in zip(alphas, alphas[1:]))


def test_alpha_falls_below_budget():
    state = AlphaState(lr=0.1, alpha_max=100.0)
    assert tune_alpha(state, penalty=1.0, budget=5.0) < 1.0


def test_alpha_is_clamped():
    state = AlphaState(lr=0.1, alpha_max=0.5)
    assert state.alpha == 0.5
    for _ in range(3):
        assert tune_alpha(state, penalty=20.0, budget=5.0) == 0.5


def test_alpha_state_round_trip():
    state = AlphaState(lr=0.1, alpha_max=100.0)
    tune_alpha(state, penalty=20.0, budget=5.0)
    other = AlphaState(lr=0.1, alpha_max=100.0)
    other.load_state_dict(*state.state_dict())
    assert other.alpha == state.alpha
    assert tune_alpha(other, 20.0, 5.0) == tune_alpha(state, 20.0, 5.0)


def test_alpha_max_must_be_non_negative():
    with pytest.raises(ValidationError):
        AlphaState(lr=0.1, alpha_max=-1.0)


def small_critic(seed=0):
    return Critic(BaselineConfig(hidden_dim=8, hidden_layers=1), 4, 2, np.random.default_rng(seed))


def test_value_penalty_gradients_match_finite_differences(fb_model):
    batch = make_batch()
    samples, _ = penalty_inputs(fb_model, batch)
    params = dict(fb_model.named_parameters())
    names = ['forward.head1.out.weight', 'forward.head2.out.bias', 'forward.sa.hidden0.bias']

    def loss():
        forward_data = fb_model.forward(batch.states, batch.actions, batch.z)
        return vc_penalty(fb_model, batch, samples, forward_data).penalty

    check_parameter_gradients(loss, [(name, params[name]) for name in names])


def test_measure_penalty_gradients_match_finite_differences(fb_model):
    batch = make_batch()
    samples, _ = penalty_inputs(fb_model, batch)
    params = dict(fb_model.named_parameters())
    names = ['forward.head1.out.bias', 'forward.sz.hidden0.bias', 'backward.net.out.bias']

    def loss():
        forward_data = fb_model.forward(batch.states, batch.actions, batch.z)
        future = fb_model.backward(batch.future_states)
        return mc_penalty(fb_model, batch, samples, forward_data, future).penalty

    check_parameter_gradients(loss, [(name, params[name]) for name in names])


def test_cql_penalty_gradients_match_finite_differences():
    critic = small_critic()
    batch = make_batch()
    samples = noisy_zero_samples(batch)
    params = dict(critic.named_parameters())
    names = ['q1.out.weight', 'q2.out.bias', 'q1.hidden0.bias']
    check_parameter_gradients(lambda: cql_penalty(critic, batch.states, batch.actions, samples).penalty,
                              [(name, params[name]) for name in names])


@pytest.mark.parametrize('penalty', [3.0, 17.0])
def test_alpha_loss_gradient_matches_finite_differences(penalty):
    state = AlphaState(lr=0.1, alpha_max=100.0, log_alpha=0.3)
    check_parameter_gradients(lambda: alpha_loss(state, penalty, 10.0), [('log_alpha', state.log_alpha)])


def test_penalties_stay_non_negative_over_many_draws(fb_model):
    critic = small_critic()
    lowest = []
    with no_grad():
        for seed in range(1000):
            batch = make_batch(seed=seed)
            samples, forward_data = penalty_inputs(fb_model, batch, seed=seed)
            future = fb_model.backward(batch.future_states)
            lowest.append(min(
                vc_penalty(fb_model, batch, samples, forward_data).penalty.item(),
                mc_penalty(fb_model, batch, samples, forward_data, future).penalty.item(),
                cql_penalty(critic, batch.states, batch.actions, samples).penalty.item(),
            ))
    assert min(lowest) >= -1e-9


def test_alpha_rises_monotonically_within_bounds():
    state = AlphaState(lr=0.1, alpha_max=1e6)
    alphas = [tune_alpha(state, penalty=60.0, budget=50.0) for _ in range(100)]
    assert all(b >= a for a, b in zip(alphas, alphas[1:]))
    assert 1.0 < alphas[-1] <= 1e6


def test_alpha_saturates_at_its_maximum():
    state = AlphaState(lr=2.0, alpha_max=1e6)
    alphas = [tune_alpha(state, penalty=60.0, budget=50.0) for _ in range(100)]
    assert alphas[-1] == 1e6
    assert max(alphas) == 1e6


def test_alpha_decays_toward_zero_below_budget():
    state = AlphaState(lr=0.1, alpha_max=1e6)
    alphas = [tune_alpha(state, penalty=40.0, budget=50.0) for _ in range(100)]
    assert all(b <= a for a, b in zip(alphas, alphas[1:]))
    assert 0.0 <= alphas[-1] < 0.1 * alphas[0]


def test_minimising_the_value_penalty_favours_dataset_actions(fb_model):
    batch = make_batch()
    samples, forward_data = penalty_inputs(fb_model, batch)
    first = vc_penalty(fb_model, batch, samples, forward_data)
    optimizer = Adam(fb_model.online_parameters('forward'), lr=1e-2)
    for _ in range(50):
        forward_data = fb_model.forward(batch.states, batch.actions, batch.z)
        optimizer.zero_grad()
        backward(vc_penalty(fb_model, batch, samples, forward_data).penalty)
        optimizer.step()
    forward_data = fb_model.forward(batch.states, batch.actions, batch.z)
    last = vc_penalty(fb_model, batch, samples, forward_data)
    assert last.penalty.item() < first.penalty.item()
    assert last.q_ood_mean - last.q_data_mean < first.q_ood_mean - first.q_data_mean
