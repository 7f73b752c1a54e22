import numpy as np
import pytest

from tdcae.errors import ConfigError, NumericError
from tdcae.nn import Activation, DenseLayer, GradientSet, Mlp
from tdcae.optim import AdamaxState, adamax_step


def single_param_mlp(value: float = 1.0) -> Mlp:
    return Mlp([DenseLayer(np.array([[value]]), np.zeros(1), Activation.IDENTITY)])


def grads_for(mlp: Mlp, weight_grad: float) -> GradientSet:
    g = GradientSet.zeros_like(mlp)
    g.weight_grads[0][0, 0] = weight_grad
    return g


def test_zero_gradient_leaves_parameters_unchanged():
    mlp = single_param_mlp(0.37)
    state = AdamaxState.for_mlp(mlp)
    updated, new_state = adamax_step(mlp, GradientSet.zeros_like(mlp), state, 0.01)
    assert np.array_equal(updated.layers[0].weights, mlp.layers[0].weights)
    assert new_state.step_count == 1


def test_first_step_matches_hand_evaluation():
    # m = 0.1*4 = 0.4, u = max(0, |4|) = 4, scale = 0.01/(1-0.9) = 0.1,
    # delta = -0.1*0.4/(4+eps) ~ -0.01
    mlp = single_param_mlp(1.0)
    state = AdamaxState.for_mlp(mlp)
    updated, _ = adamax_step(mlp, grads_for(mlp, 4.0), state, 0.01)
    delta = updated.layers[0].weights[0, 0] - 1.0
    assert delta == pytest.approx(-0.01, abs=1e-9)


def test_infinity_accumulator_sticks_at_gradient_magnitude():
    # two identical gradients: u stays |g| because beta2*|g| < |g|
    mlp = single_param_mlp()
    state = AdamaxState.for_mlp(mlp)
    mlp, state = adamax_step(mlp, grads_for(mlp, 4.0), state, 0.01)
    assert state.u.weight_grads[0][0, 0] == pytest.approx(4.0)
    mlp, state = adamax_step(mlp, grads_for(mlp, 4.0), state, 0.01)
    assert state.u.weight_grads[0][0, 0] == pytest.approx(4.0)


def test_accumulator_monotone_and_nonnegative_under_constant_magnitude():
    mlp = single_param_mlp()
    state = AdamaxState.for_mlp(mlp)
    previous = 0.0
    for step in range(50):
        sign = 1.0 if step % 2 == 0 else -1.0
        mlp, state = adamax_step(mlp, grads_for(mlp, sign * 2.5), state, 0.001)
        u = state.u.weight_grads[0][0, 0]
        assert u >= previous
        assert u >= 0.0
        previous = u
    assert previous == pytest.approx(2.5)


def test_quadratic_loss_converges():
    # f(theta) = theta^2, gradient 2*theta, from theta0 = 1 with lr 0.01
    mlp = single_param_mlp(1.0)
    state = AdamaxState.for_mlp(mlp)
    for _ in range(2000):
        theta = mlp.layers[0].weights[0, 0]
        if abs(theta) < 0.01:
            break
        mlp, state = adamax_step(mlp, grads_for(mlp, 2.0 * theta), state, 0.01)
    assert abs(mlp.layers[0].weights[0, 0]) < 0.01


def test_step_count_increments_by_one():
    mlp = single_param_mlp()
    state = AdamaxState.for_mlp(mlp)
    for expected in (1, 2, 3):
        mlp, state = adamax_step(mlp, grads_for(mlp, 1.0), state, 0.01)
        assert state.step_count == expected


def test_nonfinite_gradient_raises():
    mlp = single_param_mlp()
    state = AdamaxState.for_mlp(mlp)
    with pytest.raises(NumericError):
        adamax_step(mlp, grads_for(mlp, float("nan")), state, 0.01)


def test_nonpositive_learning_rate_raises():
    mlp = single_param_mlp()
    state = AdamaxState.for_mlp(mlp)
    with pytest.raises(ConfigError):
        adamax_step(mlp, grads_for(mlp, 1.0), state, 0.0)


def test_inputs_left_untouched():
    mlp = single_param_mlp(0.5)
    state = AdamaxState.for_mlp(mlp)
    grads = grads_for(mlp, 1.0)
    adamax_step(mlp, grads, state, 0.01)
    assert mlp.layers[0].weights[0, 0] == 0.5
    assert state.step_count == 0
    assert state.m.weight_grads[0][0, 0] == 0.0
