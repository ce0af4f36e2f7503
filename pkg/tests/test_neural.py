import numpy as np
import pytest

from artx.neural import AdamState, BackwardError, Mlp, ShapeError, adam_step, log_softmax, softmax


def numeric_grads(net, loss, h=1e-5):
    grads = []
    for p in net.params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = p[i]
            p[i] = old + h
            up = loss()
            p[i] = old - h
            down = loss()
            p[i] = old
            g[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def max_rel_error(analytic, numeric):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-7)
        worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


def gradient_check(net, x, seed):
    c = np.random.default_rng(seed).standard_normal(net.sizes[-1])

    def loss():
        return float(net.forward(x) @ c)

    net.zero_grad()
    net.forward(x)
    net.backward(c)
    analytic = [g.copy() for g in net.grads]
    return max_rel_error(analytic, numeric_grads(net, loss))


class TestForward:
    def zeroed(self, sizes, output):
        net = Mlp(sizes, "tanh", output)
        for p in net.params:
            p[...] = 0.0
        return net

    def test_zero_linear(self):
        np.testing.assert_array_equal(self.zeroed([3, 4, 2], "linear").forward(np.ones(3)), [0.0, 0.0])

    def test_zero_softmax_uniform(self):
        np.testing.assert_allclose(self.zeroed([3, 4, 5], "softmax").forward(np.ones(3)), [0.2] * 5, rtol=0, atol=1e-15)

    def test_identity_passthrough(self):
        net = Mlp([1, 1], output="linear")
        net.weights[0][...] = 1.0
        net.biases[0][...] = 0.0
        assert net.forward(np.array([3.25]))[0] == 3.25

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            Mlp([3, 2]).forward(np.ones(4))

    def test_batch_matches_single(self):
        net = Mlp([6, 8, 3], "relu", "softmax", np.random.default_rng(0))
        xs = np.random.default_rng(1).random((4, 6))
        batch = net.forward(xs)
        for x, row in zip(xs, batch):
            np.testing.assert_allclose(net.forward(x), row, rtol=1e-14)

    def test_softmax_sums_to_one(self):
        net = Mlp([10, 16, 5], "tanh", "softmax", np.random.default_rng(3), output_gain=50.0)
        p = net.forward(np.random.default_rng(4).random((100, 10)))
        assert (p > 0).all()
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)


class TestBackward:
    def test_scalar_chain_rule(self):
        net = Mlp([1, 1], output="linear")
        net.weights[0][...] = 0.7
        net.zero_grad()
        net.forward(np.array([2.0]))
        net.backward(np.array([1.0]))
        assert net.grads[0][0, 0] == 2.0
        assert net.grads[1][0] == 1.0

    def test_zero_upstream(self):
        net = Mlp([5, 4, 3], rng=np.random.default_rng(0))
        net.forward(np.ones(5))
        net.backward(np.zeros(3))
        assert all((g == 0).all() for g in net.grads)

    def test_backward_before_forward(self):
        with pytest.raises(BackwardError):
            Mlp([2, 2]).backward(np.ones(2))

    def test_policy_sized_net(self):
        net = Mlp([200, 16, 5], "tanh", "softmax", np.random.default_rng(9))
        x = np.random.default_rng(10).integers(0, 2, 200).astype(float)
        assert gradient_check(net, x, 11) < 1e-4

    @pytest.mark.parametrize("hidden", ["tanh", "relu"])
    @pytest.mark.parametrize("output", ["linear", "softmax"])
    @pytest.mark.parametrize("seed", range(5))
    def test_small_nets(self, hidden, output, seed):
        rng = np.random.default_rng(seed)
        net = Mlp([6, 7, 5, 4], hidden, output, rng)
        x = rng.standard_normal(6)
        assert gradient_check(net, x, seed + 100) < 1e-4

    def test_logit_gradient(self):
        rng = np.random.default_rng(0)
        net = Mlp([4, 6, 3], "tanh", "softmax", rng)
        x = rng.random(4)
        a = 1
        net.zero_grad()
        logits = net.logits(x)
        p = softmax(logits)
        g = -p
        g[a] += 1.0
        net.backward(g, at_logits=True)
        analytic = [g.copy() for g in net.grads]
        numeric = numeric_grads(net, lambda: float(log_softmax(net.logits(x))[a]))
        assert max_rel_error(analytic, numeric) < 1e-4

    def test_log_softmax_stable(self):
        z = np.array([1000.0, -1000.0, 0.0, 999.0, 3.0])
        lp = log_softmax(z)
        assert np.isfinite(lp).all()
        np.testing.assert_allclose(np.exp(lp).sum(), 1.0, atol=1e-12)


class TestAdam:
    def test_zero_gradient_no_change(self):
        net = Mlp([3, 4, 2], rng=np.random.default_rng(0))
        before = [p.copy() for p in net.params]
        adam_step(net, AdamState(net, lr=0.1))
        for a, b in zip(before, net.params):
            np.testing.assert_array_equal(a, b)

    def test_first_step_size(self):
        net = Mlp([1, 1], output="linear")
        net.weights[0][...] = 0.5
        state = AdamState(net, lr=0.001)
        net.grads[0][...] = 1.0
        adam_step(net, state)
        # bias-corrected step 1 moves by lr * g / (|g| + eps)
        assert net.weights[0][0, 0] == pytest.approx(0.5 - 0.001 / (1 + 1e-8), abs=1e-15)
        assert state.step == 1
        assert (net.grads[0] == 0).all()

    def test_deterministic(self):
        a = Mlp([4, 5, 2], rng=np.random.default_rng(7))
        b = a.copy()
        sa, sb = AdamState(a, lr=0.01), AdamState(b, lr=0.01)
        x = np.random.default_rng(8).random((3, 4))
        for net, st in ((a, sa), (b, sb)):
            for _ in range(3):
                net.forward(x)
                net.backward(np.ones((3, 2)))
                adam_step(net, st)
        for pa, pb in zip(a.params, b.params):
            assert pa.tobytes() == pb.tobytes()


class TestInit:
    def test_seeded_init_is_bitwise_reproducible(self):
        a = Mlp([10, 8, 3], "relu", rng=np.random.default_rng(42))
        b = Mlp([10, 8, 3], "relu", rng=np.random.default_rng(42))
        for pa, pb in zip(a.params, b.params):
            assert pa.tobytes() == pb.tobytes()

    def test_init_bounds(self):
        relu = Mlp([50, 20], "relu", rng=np.random.default_rng(0))
        tanh = Mlp([50, 20], "tanh", rng=np.random.default_rng(0))
        assert np.abs(relu.weights[0]).max() <= np.sqrt(6 / 50)
        assert np.abs(tanh.weights[0]).max() <= np.sqrt(6 / 70)


def test_checkpoint_round_trip():
    net = Mlp([7, 5, 3], "relu", "softmax", np.random.default_rng(1))
    text = net.dumps()
    assert text.startswith("mlp 2 7 5 3 relu softmax\n")
    back = Mlp.loads(text)
    for a, b in zip(net.params, back.params):
        assert a.tobytes() == b.tobytes()
    x = np.random.default_rng(2).random(7)
    np.testing.assert_array_equal(net.forward(x), back.forward(x))
