import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autodistill.neural import (
    Adam,
    Batch,
    DqnConfig,
    DqnLearner,
    DuelingQ,
    Mlp,
    SnapshotError,
    Td3Config,
    Td3Learner,
    actor_delay,
    adam_step,
    encode_product_state,
    forward_backward,
    load_into,
    load_weights,
    polyak,
    save_weights,
)

SHAPES = [(3, 1), (3, 5, 2), (4, 16, 16, 3), (9, 32, 32, 1), (7, 8, 8, 8, 4)]
H = 1e-6
TOL = 1e-4


def rel_err(a, b):
    return abs(a - b) / max(abs(a) + abs(b), 1e-10)


def directional_check(f, grad, params, rng, probes=10):
    """Compare grad . u with central differences of f along random unit u."""
    worst = 0.0
    for _ in range(probes):
        u = rng.normal(size=params.shape)
        u /= np.linalg.norm(u)
        base = params.copy()
        params[...] = base + H * u
        fp = f()
        params[...] = base - H * u
        fm = f()
        params[...] = base
        worst = max(worst, rel_err(grad @ u, (fp - fm) / (2 * H)))
    return worst


@pytest.mark.parametrize("sizes", SHAPES)
@pytest.mark.parametrize("seed", range(10))
def test_mlp_gradient(sizes, seed):
    rng = np.random.default_rng(seed)
    net = Mlp(sizes, rng)
    x = rng.normal(size=(6, sizes[0]))
    up = rng.normal(size=(6, sizes[-1]))
    _, g = forward_backward(net, x, up)
    f = lambda: float(np.sum(up * net(x)))
    assert directional_check(f, g, net.params, rng) < TOL


@pytest.mark.parametrize("sizes", SHAPES)
@pytest.mark.parametrize("seed", range(10))
def test_mlp_input_gradient(sizes, seed):
    rng = np.random.default_rng(seed)
    net = Mlp(sizes, rng)
    x = rng.normal(size=(4, sizes[0]))
    up = rng.normal(size=(4, sizes[-1]))
    _, acts = net.forward(x, keep=True)
    _, gx = net.backward(acts, up, need_input=True)
    f = lambda: float(np.sum(up * net(x)))
    assert directional_check(f, gx.ravel(), x.reshape(-1), rng) < TOL or \
        directional_check(f, gx.ravel(), x, rng) < TOL


@pytest.mark.parametrize("hidden", [(8,), (16, 16), (32, 32)])
@pytest.mark.parametrize("seed", range(10))
def test_dueling_gradient(hidden, seed):
    rng = np.random.default_rng(seed)
    net = DuelingQ(5, 4, hidden, rng)
    x = rng.normal(size=(6, 5))
    up = rng.normal(size=(6, 4))
    _, cache = net.forward(x, keep=True)
    g = net.backward(cache, up)
    f = lambda: float(np.sum(up * net(x)))
    assert directional_check(f, g, net.params, rng) < TOL


@pytest.mark.parametrize("seed", range(10))
def test_td3_actor_gradient(seed):
    """The actor step follows d Q1(s, cap * tanh(actor(s))) / d theta."""
    rng = np.random.default_rng(seed)
    lrn = Td3Learner(6, 2, Td3Config(hidden=(16, 16), dtype="float64"), rng)
    obs = rng.normal(size=(5, 6))
    cap = lrn.cfg.action_cap

    def objective():
        a = cap * np.tanh(lrn.actor(obs))
        return float(np.mean(lrn.critics[0](np.hstack([obs, a]))))

    z, acts_a = lrn.actor.forward(obs, keep=True)
    t = np.tanh(z)
    _, acts_c = lrn.critics[0].forward(np.hstack([obs, cap * t]), keep=True)
    _, g_in = lrn.critics[0].backward(acts_c, np.full((5, 1), 1 / 5), need_input=True)
    g = lrn.actor.backward(acts_a, g_in[:, 6:] * cap * (1 - t * t))
    assert directional_check(objective, g, lrn.actor.params, rng) < TOL


@pytest.mark.parametrize("seed", range(10))
def test_dqn_loss_gradient(seed):
    """The DQN step descends the weighted squared error against a fixed target."""
    rng = np.random.default_rng(seed)
    net = DuelingQ(4, 3, (16,), rng)
    x = rng.normal(size=(8, 4))
    act = rng.integers(3, size=8)
    tgt = rng.normal(size=8)
    w = rng.uniform(0.5, 2, size=8)
    rows = np.arange(8)

    def loss():
        return float(np.mean(w * (tgt - net(x)[rows, act]) ** 2))

    q, cache = net.forward(x, keep=True)
    g = np.zeros_like(q)
    g[rows, act] = -2.0 * w * (tgt - q[rows, act]) / 8
    assert directional_check(loss, net.backward(cache, g), net.params, rng) < TOL


def test_dueling_combine_centers_advantage():
    net = DuelingQ(3, 4, (8,), np.random.default_rng(0))
    x = np.random.default_rng(1).normal(size=(5, 3))
    q = net(x)
    v = net.value(x)
    assert np.allclose(q.mean(axis=1, keepdims=True), v)


def test_copy_is_independent():
    net = DuelingQ(3, 2, (4,), np.random.default_rng(0))
    c = net.copy()
    c.params += 1.0
    assert not np.allclose(net.params, c.params)
    c.value.params[0] = 123.0
    assert c.params[0] == 123.0


def test_bad_shapes_raise():
    net = Mlp((3, 2), np.random.default_rng(0))
    with pytest.raises(ValueError):
        net(np.zeros((1, 4)))
    with pytest.raises(ValueError):
        Mlp((3, 0, 1))
    with pytest.raises(ValueError):
        Mlp((3, 2), params=np.zeros(3))


# -- optimizer and target updates ------------------------------------------------


def test_adam_matches_reference_form():
    rng = np.random.default_rng(0)
    p = rng.normal(size=10)
    ref, m, v = p.copy(), np.zeros(10), np.zeros(10)
    opt = Adam(lr=0.01)
    for t in range(1, 30):
        g = rng.normal(size=10)
        opt.step(p, g)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        mh, vh = m / (1 - 0.9 ** t), v / (1 - 0.999 ** t)
        ref -= 0.01 * mh / (np.sqrt(vh) + 1e-8)
    assert np.allclose(p, ref, rtol=1e-10, atol=1e-12)


def test_adam_minimizes_quadratic():
    p = np.array([3.0, -2.0])
    opt = Adam(lr=0.1)
    for _ in range(500):
        opt.step(p, 2 * p)
    assert np.all(np.abs(p) < 1e-2)


def test_adam_rejects_non_finite_gradient():
    with pytest.raises(FloatingPointError):
        Adam().step(np.zeros(2), np.array([np.nan, 0.0]))


def test_adam_step_functional():
    p = np.ones(3)
    out, opt = adam_step(p, np.ones(3), lr=0.5)
    assert np.all(p == 1) and np.allclose(out, 0.5) and opt.t == 1


@given(st.floats(0, 1))
def test_polyak(tau):
    t, o = np.zeros(3), np.ones(3)
    polyak(t, o, tau)
    assert np.allclose(t, tau)


def test_encode_product_state():
    x = encode_product_state(np.array([0.5, 0.25]), 2, 4)
    assert x.tolist() == [0.5, 0.25, 0, 0, 1, 0]


@pytest.mark.parametrize("step,expected", [(0, 4), (19_999, 4), (20_000, 2), (10**7, 2)])
def test_actor_delay_schedule(step, expected):
    assert actor_delay(step) == expected


# -- learners --------------------------------------------------------------------


def _batch(rng, m, obs_dim, act, teacher=None, beta=None):
    return Batch(rng.normal(size=(m, obs_dim)), act, rng.normal(size=m),
                 rng.normal(size=(m, obs_dim)), np.zeros(m, dtype=bool),
                 np.full(m, np.nan) if teacher is None else teacher,
                 np.ones(m) if beta is None else beta, np.ones(m))


def test_dqn_fits_fixed_teacher():
    """beta = 1 makes the teacher value the regression target."""
    rng = np.random.default_rng(0)
    lrn = DqnLearner(3, 2, DqnConfig(hidden=(16,), lr=1e-2), rng)
    obs = rng.normal(size=(16, 3))
    act = rng.integers(2, size=16)
    b = Batch(obs, act, np.zeros(16), obs, np.zeros(16, bool), np.full(16, 7.0),
              np.ones(16), np.ones(16))
    for _ in range(800):
        err = lrn.update(b)
    assert np.max(err) < 1e-2
    assert np.allclose(lrn.q(obs)[np.arange(16), act], 7.0, atol=0.1)


def test_dqn_returns_pre_update_errors():
    rng = np.random.default_rng(1)
    lrn = DqnLearner(3, 2, DqnConfig(hidden=(8,)), rng)
    b = _batch(rng, 5, 3, rng.integers(2, size=5))
    q_before = lrn.q(b.obs)[np.arange(5), b.act]
    tgt = b.rew + 0.99 * lrn.target(b.next_obs).max(axis=1)
    assert np.allclose(lrn.update(b), (tgt - q_before) ** 2)


def test_td3_update_runs_and_syncs_targets():
    rng = np.random.default_rng(2)
    lrn = Td3Learner(4, 2, Td3Config(hidden=(8, 8)), rng)
    before = lrn.actor_t.params.copy()
    for step in range(8):
        b = _batch(rng, 6, 4, rng.uniform(-0.5, 0.5, size=(6, 2)))
        err = lrn.update(b, step)
        assert err.shape == (6,) and np.all(err >= 0)
    assert not np.allclose(before, lrn.actor_t.params)
    a = lrn.act(rng.normal(size=4))
    assert np.all(np.abs(a) <= lrn.cfg.action_cap)


def test_td3_single_critic_mode():
    rng = np.random.default_rng(3)
    lrn = Td3Learner(4, 2, Td3Config(hidden=(8,), twin=False), rng)
    c2 = lrn.critics[1].params.copy()
    lrn.update(_batch(rng, 6, 4, rng.uniform(-0.5, 0.5, size=(6, 2))), 0)
    assert np.array_equal(c2, lrn.critics[1].params)


# -- snapshots -------------------------------------------------------------------


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    nets = {"q": DuelingQ(5, 3, (8, 8), rng), "pi": Mlp((5, 4, 2), rng)}
    save_weights(tmp_path / "w.bin", nets)
    loaded = load_weights(tmp_path / "w.bin")
    assert set(loaded) == {"q.value", "q.adv", "pi"}
    assert np.array_equal(loaded["pi"].params, nets["pi"].params)
    fresh = {"q": DuelingQ(5, 3, (8, 8)), "pi": Mlp((5, 4, 2))}
    load_into(tmp_path / "w.bin", fresh)
    x = rng.normal(size=(3, 5))
    assert np.array_equal(fresh["q"](x), nets["q"](x))


def test_snapshot_rejects_garbage(tmp_path):
    (tmp_path / "w.bin").write_bytes(b"nope")
    with pytest.raises(SnapshotError):
        load_weights(tmp_path / "w.bin")


def test_snapshot_shape_mismatch(tmp_path):
    save_weights(tmp_path / "w.bin", {"pi": Mlp((5, 4, 2), np.random.default_rng(0))})
    with pytest.raises(SnapshotError):
        load_into(tmp_path / "w.bin", {"pi": Mlp((5, 3, 2))})
