import numpy as np
import pytest
from oracles import oracle_adam_scalar, oracle_forward

from fairforge.errors import ShapeMismatchError
from fairforge.model import (
    HIDDEN_UNITS,
    ModelParams,
    backward,
    forward,
    grad_logits_from_probs,
    init_params,
    predict_proba,
)
from fairforge.training import AdamState, adam_step


def test_init_params_is_seeded_and_shaped():
    p1 = init_params(dim=5, seed=42)
    p2 = init_params(dim=5, seed=42)
    p3 = init_params(dim=5, seed=43)
    assert p1.w1.shape == (5, HIDDEN_UNITS)
    assert p1.b1.shape == (HIDDEN_UNITS,)
    assert p1.w2.shape == (HIDDEN_UNITS,)
    assert p1.b2.shape == ()
    np.testing.assert_array_equal(p1.w1, p2.w1)
    np.testing.assert_array_equal(p1.w2, p2.w2)
    assert (p1.w1 != p3.w1).any()
    assert not p1.b1.any() and not p1.b2.any()
    # Glorot bounds
    lim = np.sqrt(6.0 / (5 + HIDDEN_UNITS))
    assert np.abs(p1.w1).max() <= lim


def test_forward_matches_loop_oracle(rng):
    params = init_params(dim=3, seed=0, hidden=4)
    x = rng.normal(0, 1, (6, 3))
    p, cache = forward(params, x)
    want = oracle_forward(params.w1.tolist(), params.b1.tolist(),
                          params.w2.tolist(), float(params.b2), x.tolist())
    np.testing.assert_allclose(p, want, rtol=1e-12)
    assert cache["mask"].all()


def test_forward_rejects_wrong_width():
    params = init_params(dim=3, seed=0)
    with pytest.raises(ShapeMismatchError):
        forward(params, np.zeros((4, 2)))
    with pytest.raises(ShapeMismatchError):
        forward(params, np.zeros(3))


def test_probability_clip_and_zero_gradient_mask():
    # huge weights saturate the sigmoid past the clip point
    params = ModelParams(
        w1=np.full((1, 2), 50.0), b1=np.zeros(2), w2=np.full(2, 50.0),
        b2=np.zeros(()))
    x = np.array([[5.0], [-5.0]])
    p, cache = forward(params, x)
    assert p[0] == pytest.approx(1.0 - 1e-8)
    assert not cache["mask"][0]
    dp = np.ones(2)
    dz2 = grad_logits_from_probs(cache, dp)
    assert dz2[0] == 0.0


def test_backward_matches_finite_differences(rng):
    params = init_params(dim=4, seed=1, hidden=6)
    x = rng.normal(0, 1, (12, 4))
    y = rng.integers(0, 2, 12).astype(np.float64)

    def loss_at(p: ModelParams) -> float:
        probs, _ = forward(p, x)
        return float(-np.mean(y * np.log(probs) + (1 - y) * np.log(1 - probs)))

    probs, cache = forward(params, x)
    dz2 = (probs - y) / len(y) * cache["mask"]
    grads = backward(params, cache, dz2)

    step = 1e-6
    for key in ("w1", "b1", "w2", "b2"):
        arr = getattr(params, key)
        flat = np.atleast_1d(arr.ravel())
        g_flat = np.atleast_1d(grads[key].ravel())
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_at(params)
            flat[i] = orig - step
            down = loss_at(params)
            flat[i] = orig
            fd = (up - down) / (2 * step)
            assert g_flat[i] == pytest.approx(fd, rel=1e-4, abs=1e-9), (key, i)


def test_relu_kink_uses_zero_derivative():
    # z1 exactly 0 everywhere: backward must send nothing into w1/b1
    params = ModelParams(w1=np.ones((1, 2)), b1=np.zeros(2), w2=np.ones(2),
                         b2=np.zeros(()))
    x = np.zeros((3, 1))
    p, cache = forward(params, x)
    assert (cache["z1"] == 0.0).all()
    grads = backward(params, cache, dz2=np.ones(3))
    assert not grads["w1"].any()
    assert not grads["b1"].any()
    assert grads["w2"].any() == False  # a1 = relu(0) = 0 too
    assert grads["b2"] == pytest.approx(3.0)


def test_params_jsonable_round_trip():
    params = init_params(dim=2, seed=7, hidden=3)
    d = params.to_jsonable()
    assert d["hidden_units"] == 3
    back = ModelParams.from_jsonable(d)
    np.testing.assert_allclose(back.w1, params.w1, rtol=1e-11)
    np.testing.assert_allclose(back.w2, params.w2, rtol=1e-11)


def test_predict_proba_in_open_unit_interval(rng):
    params = init_params(dim=3, seed=5)
    p = predict_proba(params, rng.normal(0, 3, (50, 3)))
    assert (p > 0).all() and (p < 1).all()


def test_adam_step_matches_scalar_recursion(rng):
    grads_seq = rng.normal(0, 1, 25).tolist()
    lr = 0.01
    want = oracle_adam_scalar(grads_seq, lr)

    params = {"w": np.zeros(1)}
    state = AdamState({"w": (1,)})
    for g in grads_seq:
        adam_step(params, {"w": np.array([g])}, state, lr)
    assert params["w"][0] == pytest.approx(want, rel=1e-12)
    assert state.t == 25


def test_adam_step_is_elementwise(rng):
    # two coordinates with independent gradient streams evolve independently
    seq_a = rng.normal(0, 1, 10)
    seq_b = rng.normal(0, 2, 10)
    params = {"w": np.zeros(2)}
    state = AdamState({"w": (2,)})
    for ga, gb in zip(seq_a, seq_b):
        adam_step(params, {"w": np.array([ga, gb])}, state, 0.05)
    assert params["w"][0] == pytest.approx(oracle_adam_scalar(seq_a.tolist(), 0.05), rel=1e-12)
    assert params["w"][1] == pytest.approx(oracle_adam_scalar(seq_b.tolist(), 0.05), rel=1e-12)
