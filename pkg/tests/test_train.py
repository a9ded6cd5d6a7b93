import math

import numpy as np
import numpy.testing as npt
import pytest

from diedat import corpus, train
from diedat.embedding import build_vocab_from_windows
from diedat.errors import ConfigError, ContractError, ParseError


# ---------------------------------------------------------------------------
# losses


def test_bce_perfect_prediction_near_zero():
    assert train.bce(np.array([1.0 - 1e-7]), np.array([1])) < 1e-6


def test_bce_uniform_is_ln2():
    loss = train.bce(np.array([0.5, 0.5]), np.array([1, 0]))
    npt.assert_allclose(loss, math.log(2.0), atol=1e-12)


def test_bce_clamps_to_finite():
    loss = train.bce(np.array([0.0]), np.array([1]), eps=1e-7)
    npt.assert_allclose(loss, -math.log(1e-7), rtol=1e-9)
    assert math.isfinite(loss)


def test_bce_matches_closed_form_recomputation():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = rng.integers(1, 9)
        p = rng.random(n)
        y = rng.integers(0, 2, size=n)
        expected = -sum(y[i] * math.log(p[i]) + (1 - y[i]) * math.log(1 - p[i])
                        for i in range(n)) / n
        npt.assert_allclose(train.bce(p, y), expected, atol=1e-9)


def test_bce_empty_rejected():
    with pytest.raises(ContractError):
        train.bce(np.array([]), np.array([]))


def test_ce_uniform_is_ln3():
    loss = train.ce(np.full((2, 3), 1 / 3), np.array([0, 2]))
    npt.assert_allclose(loss, math.log(3.0), atol=1e-12)


def test_ce_perfect_prediction_near_zero():
    probs = np.array([[1e-7, 1.0 - 2e-7, 1e-7]])
    assert train.ce(probs, np.array([1])) < 1e-6


def test_ce_batch_mean():
    probs = np.array([[0.7, 0.2, 0.1], [0.1, 0.1, 0.8]])
    a = train.ce(probs[:1], np.array([0]))
    b = train.ce(probs[1:], np.array([2]))
    npt.assert_allclose(train.ce(probs, np.array([0, 2])), (a + b) / 2, rtol=1e-12)


def test_ce_matches_closed_form_recomputation():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n = rng.integers(1, 9)
        probs = rng.random((n, 3))
        probs /= probs.sum(axis=1, keepdims=True)
        y = rng.integers(0, 3, size=n)
        expected = -sum(math.log(probs[i, y[i]]) for i in range(n)) / n
        npt.assert_allclose(train.ce(probs, y), expected, atol=1e-9)


def test_ce_bad_label_rejected():
    with pytest.raises(ContractError):
        train.ce(np.full((1, 3), 1 / 3), np.array([3]))


def test_loss_grads_match_finite_differences():
    rng = np.random.default_rng(2)
    p = rng.uniform(0.05, 0.95, size=6)
    y = rng.integers(0, 2, size=6)
    g = train.bce_grad(p, y)
    eps = 1e-7
    for i in range(6):
        pp, pm = p.copy(), p.copy()
        pp[i] += eps
        pm[i] -= eps
        num = (train.bce(pp, y) - train.bce(pm, y)) / (2 * eps)
        npt.assert_allclose(g[i], num, rtol=1e-5)

    probs = rng.uniform(0.05, 0.95, size=(4, 3))
    labels = rng.integers(0, 3, size=4)
    G = train.ce_grad(probs, labels)
    for idx in np.ndindex(probs.shape):
        pp, pm = probs.copy(), probs.copy()
        pp[idx] += eps
        pm[idx] -= eps
        num = (train.ce(pp, labels) - train.ce(pm, labels)) / (2 * eps)
        npt.assert_allclose(G[idx], num, rtol=1e-5, atol=1e-9)


def test_bce_grad_zero_where_clamped():
    g = train.bce_grad(np.array([0.0, 1.0, 0.5]), np.array([1, 0, 1]), eps=1e-7)
    assert g[0] == 0.0 and g[1] == 0.0 and g[2] != 0.0


# ---------------------------------------------------------------------------
# optimizers


def test_sgd_momentum_hand_recurrence():
    params = {"w": np.array([1.0])}
    opt = train.SgdMomentum(lr=0.01, momentum=0.9, param_names=["w"])
    opt.step(params, {"w": np.array([1.0])})
    npt.assert_allclose(params["w"], [1.0 - 0.01])
    npt.assert_allclose(opt.velocity["w"], [1.0])
    opt.step(params, {"w": np.array([1.0])})
    npt.assert_allclose(opt.velocity["w"], [1.9])
    npt.assert_allclose(params["w"], [1.0 - 0.01 - 0.019])


def test_sgd_momentum_decays_geometrically_without_gradient():
    params = {"w": np.array([0.0])}
    opt = train.SgdMomentum(lr=1.0, momentum=0.5, param_names=["w"])
    opt.step(params, {"w": np.array([1.0])})
    deltas = []
    prev = params["w"][0]
    for _ in range(4):
        opt.step(params, {"w": np.array([0.0])})
        deltas.append(prev - params["w"][0])
        prev = params["w"][0]
    for a, b in zip(deltas, deltas[1:]):
        npt.assert_allclose(b, 0.5 * a, rtol=1e-12)


def test_adam_first_step_magnitude_is_lr():
    for g0 in (10.0, -10.0):
        params = {"w": np.array([0.0])}
        opt = train.Adam(lr=0.0001, param_names=["w"])
        opt.step(params, {"w": np.array([g0])})
        # bias-corrected first step: lr * g/|g| up to the eps term
        npt.assert_allclose(params["w"], [-math.copysign(0.0001, g0)], rtol=1e-3)


def test_adam_zero_gradient_no_move():
    params = {"w": np.array([3.0])}
    opt = train.Adam(lr=0.1, param_names=["w"])
    opt.step(params, {"w": np.array([0.0])})
    npt.assert_allclose(params["w"], [3.0])


def test_adam_matches_hand_rollout():
    lr, b1, b2, eps = 0.01, 0.9, 0.999, 1e-8
    params = {"w": np.array([0.5])}
    opt = train.Adam(lr, b1, b2, eps, ["w"])
    gs = [0.3, -0.7, 1.1]
    w = 0.5
    m = v = 0.0
    for t, g in enumerate(gs, 1):
        opt.step(params, {"w": np.array([g])})
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        w -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
        npt.assert_allclose(params["w"], [w], rtol=1e-12)


# ---------------------------------------------------------------------------
# config


def test_defaults_per_architecture():
    bin_cfg = train.TrainConfig(architecture="binary").resolved()
    assert (bin_cfg.epochs, bin_cfg.batch_size, bin_cfg.embedding_dim) == (24, 128, 100)
    mlt_cfg = train.TrainConfig(architecture="mlt_bilstm").resolved()
    assert (mlt_cfg.epochs, mlt_cfg.batch_size, mlt_cfg.embedding_dim) == (35, 512, 200)
    assert mlt_cfg.layers == 2


def test_config_file_parse_and_overrides(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("architecture=mlt_bilstm\nbatch_size=516  # as configured\n"
                 "adam_lr=0.0002\npos_enabled=false\n", encoding="utf-8")
    cfg = train.config_from_mapping(train.parse_config_file(p))
    assert cfg.architecture == "mlt_bilstm"
    assert cfg.batch_size == 516
    assert cfg.adam_lr == 0.0002
    assert cfg.pos_enabled is False


def test_config_unknown_key(tmp_path):
    with pytest.raises(ConfigError):
        train.config_from_mapping({"learning": "fast"})


def test_config_bad_line(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("just some words\n", encoding="utf-8")
    with pytest.raises(ParseError):
        train.parse_config_file(p)


def test_config_validation():
    with pytest.raises(ConfigError):
        train.TrainConfig(batch_size=0).resolved()
    with pytest.raises(ConfigError):
        train.TrainConfig(sgd_lr=-1.0).resolved()
    with pytest.raises(ConfigError):
        train.TrainConfig(architecture="rnn").resolved()


# ---------------------------------------------------------------------------
# training loops (small smoke-scale; trend checks live in the acceptance suite)


def _dataset(seed=0, n=200, mode="windowed_no_boundaries"):
    docs, _ = corpus.synthesize(n, seed=seed, p_cross=0.2)
    samples = [s for d in docs for s in corpus.mask_occurrences(d, mode, 5)]
    ds = corpus.split(samples, seed=seed)
    vocab = build_vocab_from_windows(s.window_tokens for s in ds.train)
    return ds, vocab


def _history_rows(history):
    return [(e.epoch, e.train_loss, e.val_accuracy, e.val_balanced_accuracy,
             e.train_loss_pos, e.pos_skipped) for e in history.epochs]


def test_train_binary_deterministic_and_history_length():
    ds, vocab = _dataset()
    cfg = train.TrainConfig(architecture="binary", epochs=3, batch_size=32)
    _, h1 = train.train_binary(cfg, ds.train, ds.validation, vocab=vocab)
    _, h2 = train.train_binary(cfg, ds.train, ds.validation, vocab=vocab)
    assert _history_rows(h1) == _history_rows(h2)
    assert len(h1.epochs) == 3
    assert 0 <= h1.selected_epoch < 3


def test_train_binary_empty_rejected():
    with pytest.raises(ConfigError):
        train.train_binary(train.TrainConfig(), [], [], vocab=None)


def test_train_multitask_runs_and_is_deterministic():
    ds, vocab = _dataset(seed=1)
    cfg = train.TrainConfig(architecture="mlt_bilstm", epochs=2, batch_size=32,
                            embedding_dim=16, hidden_size=4)
    m1, h1 = train.train_multitask(cfg, ds.train, ds.validation, vocab=vocab)
    m2, h2 = train.train_multitask(cfg, ds.train, ds.validation, vocab=vocab)
    assert _history_rows(h1) == _history_rows(h2)
    for a, b in zip(m1.params().values(), m2.params().values()):
        npt.assert_array_equal(a, b)
    assert all(e.train_loss_pos is not None for e in h1.epochs)


def test_train_multitask_pos_disabled_leaves_pos_head_at_init():
    ds, vocab = _dataset(seed=2)
    cfg = train.TrainConfig(architecture="mlt_bilstm", epochs=2, batch_size=32,
                            embedding_dim=16, hidden_size=4, pos_enabled=False)
    model, history = train.train_multitask(cfg, ds.train, ds.validation, vocab=vocab)
    from diedat.model import build_model
    from diedat.tensor import make_rng
    fresh = build_model("mlt_bilstm", vocab, rng=make_rng(cfg.init_seed),
                        dim=16, hidden=4, layers=2)
    npt.assert_array_equal(model.params()["head_pos.W"], fresh.params()["head_pos.W"])
    assert not np.array_equal(model.params()["head_dd.W"], fresh.params()["head_dd.W"])
    assert all(e.train_loss_pos is None for e in history.epochs)


def test_train_multitask_counts_samples_without_pos_labels():
    ds, vocab = _dataset(seed=3)
    for s in ds.train[::2]:
        s.pos_label = None
    cfg = train.TrainConfig(architecture="mlt_bilstm", epochs=1, batch_size=16,
                            embedding_dim=16, hidden_size=4)
    _, history = train.train_multitask(cfg, ds.train, ds.validation, vocab=vocab)
    assert history.epochs[0].pos_skipped == len(ds.train[::2])


def test_train_loss_decreases_for_both_trainers():
    # epoch-5 mean train loss below epoch-1, median over three seeds
    binary_drops, dd_drops, pos_drops = [], [], []
    for seed in (0, 1, 2):
        docs, _ = corpus.synthesize(700, seed=seed, p_cross=0.2)
        samples = [s for d in docs
                   for s in corpus.mask_occurrences(d, "windowed_no_boundaries", 5)]
        ds = corpus.split(samples, seed=seed)
        vocab = build_vocab_from_windows(s.window_tokens for s in ds.train)
        cfg = train.TrainConfig(architecture="binary", epochs=5, batch_size=32,
                                shuffle_seed=seed, init_seed=seed, dropout_seed=seed)
        _, hb = train.train_binary(cfg, ds.train, ds.validation, vocab=vocab)
        binary_drops.append(hb.epochs[4].train_loss < hb.epochs[0].train_loss)
        cfg = train.TrainConfig(architecture="mlt_bilstm", epochs=5, batch_size=32,
                                embedding_dim=48, hidden_size=8,
                                shuffle_seed=seed, init_seed=seed, dropout_seed=seed)
        _, hm = train.train_multitask(cfg, ds.train, ds.validation, vocab=vocab)
        dd_drops.append(hm.epochs[4].train_loss < hm.epochs[0].train_loss)
        pos_drops.append(hm.epochs[4].train_loss_pos < hm.epochs[0].train_loss_pos)
    assert np.median(binary_drops) == 1.0
    assert np.median(dd_drops) == 1.0
    assert np.median(pos_drops) == 1.0


def test_history_tsv(tmp_path):
    ds, vocab = _dataset(seed=4, n=60)
    cfg = train.TrainConfig(architecture="binary", epochs=2, batch_size=16)
    _, history = train.train_binary(cfg, ds.train, ds.validation, vocab=vocab)
    p = tmp_path / "history.tsv"
    train.write_history_tsv(history, p)
    lines = p.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("epoch\t")
    assert len(lines) == 3
    assert any(line.endswith("*") for line in lines[1:])
