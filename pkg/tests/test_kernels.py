import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from navspace.kernels import (GcnLayerParams, GraphSpec, Net1LossConfig, OutOfSupportError, bilinear_pool,
                              categorical_kl, gcn_layer_forward, gcn_stack_forward, gumbel_softmax_sample,
                              net1_loss, net2_loss, softmax, ssim, uniform_prior)

# ---- Gumbel-Softmax -----------------------------------------------------------


def test_gumbel_equal_logits_forced_noise():
    out = gumbel_softmax_sample([1.5, 1.5], tau=0.3, noise=[0.7, 0.7])
    assert out.tolist() == [0.5, 0.5]


def test_gumbel_rejects_bad_tau():
    with pytest.raises(ValueError):
        gumbel_softmax_sample([0.0, 1.0], tau=0.0, rng=np.random.default_rng(0))


def test_gumbel_low_temperature_is_nearly_one_hot():
    rng = np.random.default_rng(1)
    draws = gumbel_softmax_sample(np.broadcast_to([10.0, 0.0], (1000, 2)), tau=0.01, rng=rng)
    assert np.sum(draws.max(axis=1) > 0.99) >= 999


def test_gumbel_argmax_frequency_matches_softmax():
    rng = np.random.default_rng(2)
    logits = np.array([0.5, -1.0, 1.5, 0.0])
    draws = gumbel_softmax_sample(np.broadcast_to(logits, (100_000, 4)), tau=1.0, rng=rng)
    freq = np.bincount(draws.argmax(axis=1), minlength=4) / 100_000
    assert np.max(np.abs(freq - softmax(logits))) <= 0.02


def test_gumbel_sharpens_as_tau_drops():
    rng = np.random.default_rng(3)
    logits = np.broadcast_to([2.0, 0.0, -1.0], (10_000, 3))
    means = [gumbel_softmax_sample(logits, tau, rng=rng).max(axis=1).mean() for tau in (1.0, 0.1, 0.01)]
    assert means[0] <= means[1] <= means[2]


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.integers(2, 6), elements=st.floats(-20, 20)), st.floats(0.05, 5.0),
       st.integers(0, 1000))
def test_gumbel_on_simplex(logits, tau, seed):
    out = gumbel_softmax_sample(logits, tau, rng=np.random.default_rng(seed))
    assert np.all(out >= 0)
    assert abs(out.sum() - 1.0) <= 1e-9


# ---- KL -------------------------------------------------------------------------

def test_kl_examples():
    assert categorical_kl([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert categorical_kl([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-12)
    with pytest.raises(OutOfSupportError):
        categorical_kl([0.5, 0.5], [1.0, 0.0])


def test_kl_fuzz_nonnegative_and_zero_iff_equal():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        q = rng.dirichlet(np.ones(4))
        p = rng.dirichlet(np.ones(4))
        d = categorical_kl(q, p)
        assert d >= 0.0
        assert categorical_kl(q, q) <= 1e-12
        if np.max(np.abs(q - p)) > 1e-6:
            assert d > 1e-12


# ---- Net-I loss ---------------------------------------------------------------------

def test_net1_perfect_reconstruction_is_zero():
    x = np.random.default_rng(5).random((3, 4))
    prior = uniform_prior(2)
    q = np.broadcast_to(prior, (3, 4, 2))
    assert net1_loss(x, [x, x], q, prior, Net1LossConfig(k_samples=2)) == 0.0


def test_net1_single_pixel_hand_values():
    prior = uniform_prior(2)
    q = prior.reshape(1, 1, 2)
    x, xh = np.zeros((1, 1)), np.full((1, 1), 2.0)
    assert net1_loss(x, [xh], q, prior, Net1LossConfig(1.0, 1, 1)) == pytest.approx(2.0, abs=1e-10)
    e2 = math.e ** 2
    got = net1_loss(x, [xh], q, prior, Net1LossConfig(e2, 1, 1))
    assert got == pytest.approx(4 / (2 * e2) + 1, abs=1e-10)


def test_net1_two_by_two_fixture():
    x = np.array([[1.0, 0.0], [0.0, 1.0]])
    xh = np.array([[0.5, 0.0], [0.0, 1.0]])
    q = np.full((2, 2, 2), 0.5)
    q[0, 0] = (1.0, 0.0)
    got = net1_loss(x, [xh], q, uniform_prior(2), Net1LossConfig(sigma_sq=2.0))
    assert got == pytest.approx(3 * math.log(2) + 0.0625, abs=1e-10)


def test_net1_minimised_at_truth():
    rng = np.random.default_rng(6)
    x = rng.random((3, 3))
    prior = uniform_prior(3)
    q = rng.dirichlet(np.ones(3), size=(3, 3))
    base = net1_loss(x, [x], q, prior)
    for i in range(3):
        for j in range(3):
            xh = x.copy()
            xh[i, j] += rng.choice([-1, 1]) * rng.uniform(1e-3, 1)
            assert net1_loss(x, [xh], q, prior) > base


def test_net1_shape_errors():
    prior = uniform_prior(2)
    with pytest.raises(ValueError):
        net1_loss(np.zeros((2, 2)), [np.zeros((2, 3))], np.full((2, 2, 2), 0.5), prior)
    with pytest.raises(ValueError):
        net1_loss(np.zeros((2, 2)), [np.zeros((2, 2))], np.full((2, 3, 2), 0.5), prior)


# ---- SSIM / Net-II ------------------------------------------------------------------

def test_ssim_self_and_symmetry():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b = rng.random((16, 16)), rng.random((16, 16))
        assert abs(ssim(a, a) - 1.0) <= 1e-12
        assert abs(ssim(a, b) - ssim(b, a)) <= 1e-12
        assert -1.0 <= ssim(a, b) <= 1.0


def test_ssim_constant_images_closed_form():
    c1, c2 = 1e-4, 9e-4
    a, b = np.full((12, 12), 0.3), np.full((12, 12), 0.8)
    want = (2 * 0.3 * 0.8 + c1) / (0.3 ** 2 + 0.8 ** 2 + c1)
    assert ssim(a, b, c1=c1, c2=c2) == pytest.approx(want, abs=1e-12)


def test_ssim_shape_errors():
    with pytest.raises(ValueError):
        ssim(np.zeros((12, 12)), np.zeros((12, 13)))
    with pytest.raises(ValueError):
        ssim(np.zeros((5, 5)), np.zeros((5, 5)), window=11)


def test_net2_identity_and_weights():
    x = np.random.default_rng(8).random((12, 12))
    assert net2_loss(x, x) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        net2_loss(x, x, 0.0, 0.2)


def test_net2_mse_term():
    t = np.zeros((2, 2))
    r = t.copy()
    r[0, 0] = 1.0
    s = ssim(t, r, window=1)
    assert net2_loss(t, r, 0.8, 0.2, window=1) - 0.8 * (1 - s) / 2 == pytest.approx(0.05, abs=1e-12)
    assert net2_loss(t, r, 0.0, 1.0, window=1) == pytest.approx(0.25, abs=1e-12)


# ---- GCN ----------------------------------------------------------------------------

IDENT = dict(activation="identity", residual=False)


def test_gcn_chain_fixture_exact():
    out = gcn_layer_forward(GraphSpec.chain([1.0, 2.0, 3.0]), GcnLayerParams([[2.0]], [[1.0]], **IDENT))
    assert out.ravel().tolist() == [4.0, 8.0, 8.0]


def test_gcn_zero_weights_give_activation_of_zero():
    g = GraphSpec.chain(np.ones((4, 2)))
    out = gcn_layer_forward(g, GcnLayerParams(np.zeros((2, 2)), np.zeros((2, 2)), activation="sigmoid"))
    assert np.all(out == 0.5)


def test_gcn_isolated_node():
    g = GraphSpec(((1,), (0,), ()), [[1.0], [2.0], [3.0]])
    out = gcn_layer_forward(g, GcnLayerParams([[2.0]], [[5.0]], activation="relu"))
    assert out[2, 0] == 6.0


def test_graph_validation():
    with pytest.raises(ValueError):
        GraphSpec(((1,), ()), [[0.0], [0.0]])
    with pytest.raises(ValueError):
        GraphSpec(((0,),), [[0.0]])
    with pytest.raises(ValueError):
        GcnLayerParams(np.zeros((2, 2)), np.zeros((2, 3)))


def test_gcn_stack_residual_paths():
    g = GraphSpec.chain([1.0, 2.0, 3.0])
    zero = GcnLayerParams([[0.0]], [[0.0]], activation="identity")
    assert np.array_equal(gcn_stack_forward(g, [zero] * 6), g.features)
    one = GcnLayerParams([[2.0]], [[1.0]], activation="identity")
    assert gcn_stack_forward(g, [one]).ravel().tolist() == [5.0, 10.0, 11.0]
    # two layers by hand: (1,2,3) -> (5,10,11) -> 2f + neighbours + f
    assert gcn_stack_forward(g, [one, one]).ravel().tolist() == [25.0, 46.0, 43.0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3))
def test_gcn_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    n, d = 5, 3
    p = GcnLayerParams(rng.normal(size=(d, d)), rng.normal(size=(d, d)), **IDENT)
    f, h = rng.normal(size=(n, d)), rng.normal(size=(n, d))
    g = GraphSpec.chain(f)
    lhs = gcn_layer_forward(g.with_features(a * f + b * h), p)
    rhs = a * gcn_layer_forward(g, p) + b * gcn_layer_forward(g.with_features(h), p)
    assert np.allclose(lhs, rhs, atol=1e-10, rtol=0)


# ---- bilinear pooling -----------------------------------------------------------------

def test_bilinear_examples():
    fmap = np.arange(12.0).reshape(3, 4)
    assert bilinear_pool(fmap, (2, 1)).tolist() == [fmap[1, 2]]
    assert bilinear_pool(np.array([[0.0, 4.0]]).reshape(1, 2), (0.5, 0)).tolist() == [2.0]
    corners = np.array([[1.0, 10.0], [100.0, 1000.0]])
    w = np.array([0.1875, 0.0625, 0.5625, 0.1875])
    want = w @ corners.ravel()
    assert bilinear_pool(corners, (0.25, 0.75))[0] == pytest.approx(want, abs=1e-12)
    with pytest.raises(ValueError):
        bilinear_pool(corners, (1.5, 0))
