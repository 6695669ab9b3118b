import itertools
import json

import numpy as np
import pytest

import monoslice.gcn as gcn_mod
from monoslice.features import FeatureBundle, build_feature_bundle, normalized_adjacency
from monoslice.gcn import (
    DivergenceError,
    GcnParams,
    NonFiniteTensorError,
    TrainingConfig,
    cluster_loss,
    decode,
    encode,
    gradients,
    init_params,
    make_dropout_mask,
    one_cycle_lr,
    train,
    training_loss,
)
from monoslice.gcn import _forward
from monoslice.trace_model import build_call_graph, parse_trace_file

from .oracles import adjusted_rand_index


def clique_bundle():
    """Two disconnected 5-cliques, one entry point each."""
    a = [f"A{i}" for i in range(5)]
    b = [f"B{i}" for i in range(5)]
    doc = {
        "format": 1,
        "classes": a + b,
        "entrypoints": [
            {"name": "uA", "calls": [[x, y] for x, y in itertools.combinations(a, 2)]},
            {"name": "uB", "calls": [[x, y] for x, y in itertools.combinations(b, 2)]},
        ],
        "inheritance": [],
    }
    model = parse_trace_file(json.dumps(doc).encode())
    graph = build_call_graph(model)
    return build_feature_bundle(model, graph)


def random_inputs(seed, with_mask=False):
    rng = np.random.default_rng(seed)
    n, p = 5, 3
    A = (rng.random((n, n)) > 0.5).astype(float)
    A = np.triu(A, 1)
    A_hat = normalized_adjacency(A + A.T)
    X = rng.random((n, p))
    X /= X.sum(axis=1, keepdims=True)
    params = init_params((p, 4, 3), int(rng.integers(1 << 31)))
    centers = rng.normal(size=(2, 3))
    mask = make_dropout_mask((n, 4), 0.3, rng) if with_mask else None
    return params, X, A_hat, centers, mask


def finite_difference_worst(params, X, A_hat, centers, alphas, mask, h=1e-5):
    g = gradients(params, X, A_hat, centers, *alphas, dropout_mask=mask)
    worst = 0.0
    for name in ("W1", "W2", "W3", "W4"):
        W = getattr(params, name)
        G = getattr(g, "d" + name)
        it = np.nditer(W, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = W[idx]
            W[idx] = orig + h
            fw = _forward(X, A_hat, params, mask)
            lp = training_loss(X, fw.R, fw.E, centers, *alphas)
            W[idx] = orig - h
            fw = _forward(X, A_hat, params, mask)
            lm = training_loss(X, fw.R, fw.E, centers, *alphas)
            W[idx] = orig
            fd = (lp - lm) / (2 * h)
            denom = max(abs(G[idx]), abs(fd))
            err = abs(G[idx] - fd) / denom if denom > 1e-7 else abs(G[idx] - fd)
            worst = max(worst, err)
    return worst


# ------------------------------------------------------------- init_params


def test_init_params_deterministic():
    a = init_params((6, 4, 3), 42)
    b = init_params((6, 4, 3), 42)
    for name in ("W1", "W2", "W3", "W4"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_init_params_seed_sensitivity():
    a = init_params((6, 4, 3), 1)
    b = init_params((6, 4, 3), 2)
    assert not np.array_equal(a.W1, b.W1)


def test_init_params_rejects_zero_dims():
    with pytest.raises(ValueError):
        init_params((0, 4, 3), 0)


def test_init_params_shapes_and_zero_mean():
    p = init_params((100, 50, 20), 7)
    assert p.W1.shape == (100, 50)
    assert p.W2.shape == (50, 20)
    assert p.W3.shape == (20, 50)
    assert p.W4.shape == (50, 100)
    # standardize by each matrix's 1/sqrt(fan_in) scale, pool all entries
    z = np.concatenate([
        p.W1.ravel() * np.sqrt(100),
        p.W2.ravel() * np.sqrt(50),
        p.W3.ravel() * np.sqrt(20),
        p.W4.ravel() * np.sqrt(50),
    ])
    assert z.size >= 10_000
    assert abs(z.mean()) <= 3 / np.sqrt(z.size)


# ----------------------------------------------------------- encode/decode


def test_encode_zero_weights_zero_embedding():
    _, X, A_hat, _, _ = random_inputs(0)
    params = GcnParams(
        W1=np.zeros((3, 4)), W2=np.zeros((4, 3)),
        W3=np.zeros((3, 4)), W4=np.zeros((4, 3)),
    )
    assert not encode(X, A_hat, params).any()


def test_encode_output_shape():
    params, X, A_hat, _, _ = random_inputs(1)
    assert encode(X, A_hat, params).shape == (5, 3)


def test_encode_dropout_zero_equals_inference():
    params, X, A_hat, _, _ = random_inputs(2)
    rng = np.random.default_rng(0)
    out_train = encode(X, A_hat, params, dropout_rate=0.0, training=True, rng=rng)
    out_infer = encode(X, A_hat, params)
    assert np.array_equal(out_train, out_infer)


def test_encode_training_dropout_requires_rng():
    params, X, A_hat, _, _ = random_inputs(3)
    with pytest.raises(ValueError, match="rng"):
        encode(X, A_hat, params, dropout_rate=0.5, training=True)


def test_encode_dimension_mismatch():
    params, X, A_hat, _, _ = random_inputs(4)
    with pytest.raises(ValueError):
        encode(X[:3], A_hat, params)


def test_dropout_mask_values_and_rate():
    rng = np.random.default_rng(9)
    mask = make_dropout_mask((200, 50), 0.4, rng)
    values = set(np.unique(mask).round(12))
    assert values <= {0.0, round(1 / 0.6, 12)}
    frac_dropped = (mask == 0).mean()
    assert abs(frac_dropped - 0.4) < 0.03


def test_decode_zero_embedding():
    params, X, A_hat, _, _ = random_inputs(5)
    assert not decode(np.zeros((5, 3)), A_hat, params).any()


def test_decode_shape_matches_features():
    params, X, A_hat, _, _ = random_inputs(6)
    E = encode(X, A_hat, params)
    assert decode(E, A_hat, params).shape == X.shape


def test_decode_dimension_mismatch():
    params, X, A_hat, _, _ = random_inputs(7)
    with pytest.raises(ValueError):
        decode(np.zeros((5, 9)), A_hat, params)


def test_training_improves_round_trip_reconstruction():
    bundle = clique_bundle()
    X, A_hat = bundle.X, bundle.A_hat
    params = init_params((X.shape[1], 16, 8), 3)
    before = float(np.mean((decode(encode(X, A_hat, params), A_hat, params) - X) ** 2))
    for _ in range(200):
        g = gradients(params, X, A_hat, None, 1.0, 0.0, 0.0)
        for W, dW in ((params.W1, g.dW1), (params.W2, g.dW2), (params.W3, g.dW3), (params.W4, g.dW4)):
            W -= 0.05 * dW
    after = float(np.mean((decode(encode(X, A_hat, params), A_hat, params) - X) ** 2))
    assert after < before


# ------------------------------------------------------------------ losses


def test_cluster_loss_points_on_centers():
    centers = np.array([[0.0, 0.0], [1.0, 1.0]])
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
    assert cluster_loss(pts, centers) == 0.0


def test_cluster_loss_single_distance():
    assert cluster_loss(np.array([[3.0, 0.0]]), np.array([[0.0, 0.0]])) == 3.0


def test_cluster_loss_hand_computed():
    pts = np.array([[0.0, 0.0], [2.0, 0.0], [5.0, 1.0]])
    centers = np.array([[0.0, 1.0], [5.0, 0.0]])
    expected = 1.0 + np.sqrt(4 + 1) + 1.0
    assert cluster_loss(pts, centers) == pytest.approx(expected, abs=1e-12)


def test_cluster_loss_empty_centers():
    with pytest.raises(ValueError, match="non-empty"):
        cluster_loss(np.ones((2, 2)), np.empty((0, 2)))


def test_training_loss_all_zero_coefficients():
    _, X, A_hat, centers, _ = random_inputs(8)
    assert training_loss(X, X + 1, X[:, :2], centers[:, :2], 0, 0, 0) == 0.0


def test_training_loss_perfect_fit():
    X = np.ones((3, 4))
    E = np.array([[1.0, 2.0]] * 3)
    centers = np.array([[1.0, 2.0]])
    assert training_loss(X, X.copy(), E, centers, 1.0, 1.0, 0.0) == 0.0


def test_training_loss_matches_term_sum():
    rng = np.random.default_rng(13)
    X = rng.random((4, 6))
    R = rng.random((4, 6))
    E = rng.random((4, 3))
    centers = rng.random((2, 3))
    a1, a2, a3 = 0.3, 0.7, 0.2
    expected = (
        a1 * np.mean((R - X) ** 2)
        + a2 * cluster_loss(E, centers)
        + a3 * np.mean(np.sum(E**2, axis=1))
    )
    assert training_loss(X, R, E, centers, a1, a2, a3) == pytest.approx(expected, abs=1e-12)


def test_training_loss_rejects_negative_coefficients():
    X = np.ones((2, 2))
    with pytest.raises(ValueError):
        training_loss(X, X, X, X, -0.1, 0, 0)


# --------------------------------------------------------------- gradients


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_gradients_match_finite_differences(seed):
    params, X, A_hat, centers, _ = random_inputs(seed)
    worst = finite_difference_worst(params, X, A_hat, centers, (0.7, 0.5, 0.3), None)
    assert worst <= 1e-4


def test_gradients_match_finite_differences_with_dropout_mask():
    params, X, A_hat, centers, mask = random_inputs(0, with_mask=True)
    worst = finite_difference_worst(params, X, A_hat, centers, (0.7, 0.5, 0.3), mask)
    assert worst <= 1e-4


def test_gradients_zero_when_all_coefficients_zero():
    params, X, A_hat, centers, _ = random_inputs(10)
    g = gradients(params, X, A_hat, centers, 0.0, 0.0, 0.0)
    assert g.loss == 0.0
    for name in ("dW1", "dW2", "dW3", "dW4"):
        assert not getattr(g, name).any()


def test_gradients_dead_relu_blocks_flow():
    # W1 = -1 forces Z1 < 0, so nothing downstream depends on W1
    X = np.array([[1.0]])
    A_hat = np.array([[1.0]])
    params = GcnParams(
        W1=np.array([[-1.0]]), W2=np.array([[1.0]]),
        W3=np.array([[1.0]]), W4=np.array([[1.0]]),
    )
    g = gradients(params, X, A_hat, np.array([[5.0]]), 1.0, 1.0, 1.0)
    assert g.dW1 == 0.0


def test_gradients_flag_non_finite_input():
    params, X, A_hat, centers, _ = random_inputs(11)
    X = X.copy()
    X[0, 0] = np.inf
    with pytest.raises(NonFiniteTensorError, match="Z1"):
        gradients(params, X, A_hat, centers, 1.0, 0.0, 0.0)


# ------------------------------------------------------------ one_cycle_lr


def test_one_cycle_endpoints():
    assert one_cycle_lr(0, 1000, 0.01, 0.1) == pytest.approx(0.01)
    assert one_cycle_lr(450, 1000, 0.01, 0.1) == pytest.approx(0.1)
    assert one_cycle_lr(900, 1000, 0.01, 0.1) == pytest.approx(0.01)
    assert one_cycle_lr(1000, 1000, 0.01, 0.1) == pytest.approx(0.0001)


def test_one_cycle_midpoints_linear():
    assert one_cycle_lr(225, 1000, 0.01, 0.1) == pytest.approx(0.055)
    assert one_cycle_lr(675, 1000, 0.01, 0.1) == pytest.approx(0.055)
    assert one_cycle_lr(950, 1000, 0.01, 0.1) == pytest.approx(0.01 - 0.0099 / 2)


def test_one_cycle_clamps_past_end():
    assert one_cycle_lr(5000, 1000, 0.01, 0.1) == pytest.approx(0.0001)


def test_one_cycle_rejects_bad_args():
    with pytest.raises(ValueError):
        one_cycle_lr(0, 0, 0.01, 0.1)
    with pytest.raises(ValueError):
        one_cycle_lr(-1, 10, 0.01, 0.1)


# ----------------------------------------------------------- TrainingConfig


@pytest.mark.parametrize(
    "kwargs",
    [
        {"k": 0},
        {"epochs": 0},
        {"base_lr": 0.0},
        {"base_lr": 0.2, "max_lr": 0.1},
        {"dropout_rate": 1.0},
        {"alpha1": -0.1},
        {"h1": 0},
        {"lr_update_interval": 0},
    ],
)
def test_training_config_validation(kwargs):
    with pytest.raises(ValueError):
        TrainingConfig(**kwargs)


# ------------------------------------------------------------------- train


def test_train_rejects_k_above_n():
    bundle = clique_bundle()
    with pytest.raises(ValueError, match="exceeds"):
        train(bundle, TrainingConfig(k=11, epochs=5, h1=4, h2=3), 0)


def test_train_k1_single_cluster():
    bundle = clique_bundle()
    _, partition = train(bundle, TrainingConfig(k=1, epochs=5, h1=4, h2=3), 0)
    assert partition.k == 1
    assert set(partition.assignment) == set(bundle.nodes)


def test_train_deterministic():
    bundle = clique_bundle()
    cfg = TrainingConfig(k=2, epochs=30, h1=8, h2=4)
    r1 = train(bundle, cfg, 17)
    r2 = train(bundle, cfg, 17)
    assert r1.partition == r2.partition
    assert np.array_equal(r1.embeddings, r2.embeddings)
    assert r1.losses == r2.losses


def test_train_recovers_cliques():
    bundle = clique_bundle()
    cfg = TrainingConfig(k=2, epochs=300, h1=16, h2=8)
    truth = [0] * 5 + [1] * 5
    hits = 0
    for seed in range(4):
        res = train(bundle, cfg, seed)
        labels = [res.partition.assignment[n] for n in bundle.nodes]
        hits += adjusted_rand_index(labels, truth) == 1.0
    assert hits == 4


def test_train_loss_trend_downward():
    bundle = clique_bundle()
    res = train(bundle, TrainingConfig(k=2, epochs=300, h1=16, h2=8), 5)
    assert np.median(res.losses[-10:]) <= np.median(res.losses[:10])


def test_train_result_unpacks_as_pair():
    bundle = clique_bundle()
    emb, part = train(bundle, TrainingConfig(k=2, epochs=5, h1=4, h2=3), 1)
    assert emb.shape == (10, 3)
    assert part.k == 2


def test_train_divergence_reports_epoch_zero_on_poisoned_features():
    bundle = clique_bundle()
    poisoned = FeatureBundle(
        nodes=bundle.nodes,
        entry_point_names=bundle.entry_point_names,
        E=bundle.E, C=bundle.C, D=bundle.D,
        X=bundle.X * 1e200,
        A_hat=bundle.A_hat,
    )
    with pytest.raises(DivergenceError) as exc_info:
        train(poisoned, TrainingConfig(k=2, epochs=5, h1=4, h2=3), 0)
    assert exc_info.value.epoch == 0
    assert "epoch 0" in str(exc_info.value)


def test_train_divergence_reports_mid_training_epoch(monkeypatch):
    bundle = clique_bundle()
    real = gcn_mod.gradients
    calls = {"main": 0}

    def flaky(params, X, A_hat, centers, *args, **kwargs):
        if centers is not None:
            calls["main"] += 1
            if calls["main"] == 3:
                raise NonFiniteTensorError("tensor Z2 contains non-finite values")
        return real(params, X, A_hat, centers, *args, **kwargs)

    monkeypatch.setattr(gcn_mod, "gradients", flaky)
    with pytest.raises(DivergenceError) as exc_info:
        train(bundle, TrainingConfig(k=2, epochs=10, h1=4, h2=3), 0)
    assert exc_info.value.epoch == 2
