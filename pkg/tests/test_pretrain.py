import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polylab import chemcore as cc
from polylab import encoders as en
from polylab import pretrain as pt
from polylab import tensorcore as tc


# --------------------------------------------------------------- corruption

def test_corrupt_zero_probability(vocab):
    ids = tuple(cc.tokenize("[*]OC(=O)C[*]", vocab).ids)
    out, plan = pt.corrupt_tokens(ids, vocab, 0.0,
                                  np.random.default_rng(0))
    assert out == ids
    assert len(plan) == 0


def test_corrupt_only_touches_plan(vocab):
    ids = tuple(cc.tokenize("[*]CC(c1ccccc1)C(=O)OC[*]", vocab).ids)
    rng = np.random.default_rng(1)
    out, plan = pt.corrupt_tokens(ids, vocab, 0.3, rng)
    for i, (a, b) in enumerate(zip(ids, out)):
        if i not in plan.actions:
            assert a == b
        elif plan.actions[i] == "keep":
            assert a == b
        elif plan.actions[i] == "mask":
            assert b == vocab.mask_id


def test_corrupt_full_mask_keep_fraction(vocab):
    rng = np.random.default_rng(2)
    ids = tuple([5] * 1000)
    keeps = 0
    trials = 100
    for _ in range(trials):
        _, plan = pt.corrupt_tokens(ids, vocab, 1.0, rng)
        keeps += sum(1 for a in plan.actions.values() if a == "keep")
    rate = keeps / (trials * 1000)
    assert abs(rate - 0.10) < 0.01


def test_corrupt_bits_flip(rng):
    bits = np.zeros(2000, dtype=np.int64)
    out, plan = pt.corrupt_bits(bits, 0.5, rng)
    for idx, action in plan.actions.items():
        if action == "mask":
            assert out[idx] == 2
        elif action == "random":
            assert out[idx] == 1       # flip of 0
        else:
            assert out[idx] == 0


def test_corrupt_z_indices(rng):
    z = np.array([6, 6, 8, 7, 16], dtype=np.int64)
    out, plan = pt.corrupt_z_indices(z, [6, 8], 119, 0.9, rng)
    for idx, action in plan.actions.items():
        if action == "mask":
            assert out[idx] == 119
        elif action == "random":
            assert out[idx] in (6, 8)


# -------------------------------------------------------------------- losses

def test_mlm_loss_uniform_closed_form(rng):
    states = tc.constant(rng.normal(size=(6, 4)))
    w = tc.constant(np.zeros((4, 265)))
    b = tc.constant(np.zeros(265))
    loss = pt.mlm_loss([1] * 6, states, [0, 2, 4], w, b)
    assert abs(float(loss.value) - math.log(265)) < 1e-12


def test_mlm_loss_perfect_head():
    states = tc.constant(np.eye(3))
    w = tc.constant(np.eye(3) * 200.0)
    b = tc.constant(np.zeros(3))
    loss = pt.mlm_loss([0, 1, 2], states, [0, 1, 2], w, b)
    assert float(loss.value) < 1e-12


def test_mlm_loss_ignores_unmasked(rng):
    states_a = rng.normal(size=(5, 4))
    states_b = states_a.copy()
    states_b[[0, 4]] += 10.0              # perturb unmasked rows only
    w = tc.constant(rng.normal(size=(4, 7)))
    b = tc.constant(np.zeros(7))
    targets = [1, 2, 3, 4, 5]
    la = pt.mlm_loss(targets, tc.constant(states_a), [1, 2, 3], w, b)
    lb = pt.mlm_loss(targets, tc.constant(states_b), [1, 2, 3], w, b)
    assert float(la.value) == float(lb.value)


def test_mlm_loss_empty_mask(rng):
    with pytest.raises(pt.EmptyMaskError):
        pt.mlm_loss([1], tc.constant(rng.normal(size=(1, 4))), [],
                    tc.constant(np.zeros((4, 5))), tc.constant(np.zeros(5)))


def test_node_recon_uniform_z100(rng):
    states = tc.constant(rng.normal(size=(4, 3)))
    w = tc.constant(np.zeros((3, 100)))
    b = tc.constant(np.zeros(100))
    loss = pt.node_recon_loss([7, 7, 7, 7], states, [1, 3], w, b)
    assert abs(float(loss.value) - math.log(100)) < 1e-12


def test_infonce_closed_forms():
    eye = np.eye(2)
    loss = pt.infonce(tc.constant(eye), tc.constant(eye), tau=0.07)
    expected = math.log(1.0 + math.exp(-1.0 / 0.07))
    assert abs(float(loss.value) - expected) < 1e-12

    single = np.array([[0.6, 0.8]])
    assert float(pt.infonce(tc.constant(single),
                            tc.constant(single)).value) == 0.0

    shuffled = pt.infonce(tc.constant(eye), tc.constant(eye[::-1].copy()),
                          tau=0.07)
    assert float(shuffled.value) > expected


def test_infonce_guards():
    ok = np.eye(2)
    with pytest.raises(pt.NonPositiveTemperatureError):
        pt.infonce(tc.constant(ok), tc.constant(ok), tau=0.0)
    with pytest.raises(pt.NonUnitNormError):
        pt.infonce(tc.constant(ok * 2.0), tc.constant(ok))
    with pytest.raises(pt.CountMismatchError):
        pt.infonce(tc.constant(ok), tc.constant(np.eye(3)))


def test_infonce_nonnegative_and_positive_when_offdiag_dominates(rng):
    for _ in range(20):
        a = rng.normal(size=(5, 8))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        t = rng.normal(size=(5, 8))
        t /= np.linalg.norm(t, axis=1, keepdims=True)
        loss = float(pt.infonce(tc.constant(a), tc.constant(t)).value)
        assert loss >= 0.0
        sims = a @ t.T
        off = sims - np.diag(np.diag(sims))
        if np.any(off.max(axis=1) >= np.diag(sims)):
            assert loss > 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=6),
       st.integers(min_value=0, max_value=10_000))
def test_infonce_temperature_monotone(b, seed):
    # rows unit-norm with the diagonal maximal per row
    rng = np.random.default_rng(seed)
    t = rng.normal(size=(b, 8))
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    anchors = t + rng.normal(scale=0.05, size=t.shape)
    anchors /= np.linalg.norm(anchors, axis=1, keepdims=True)
    sims = anchors @ t.T
    if not np.all(np.argmax(sims, axis=1) == np.arange(b)):
        return
    losses = [float(pt.infonce(tc.constant(anchors), tc.constant(t),
                               tau=tau).value)
              for tau in (0.5, 0.2, 0.07, 0.02)]
    for hi, lo in zip(losses, losses[1:]):
        assert lo <= hi + 1e-12


def test_infonce_gradient(rng):
    targets = rng.normal(size=(4, 8))

    def f(leaf):
        a = tc.l2_normalize(leaf)
        return pt.infonce(a, tc.l2_normalize(tc.constant(targets)),
                          tau=0.07)

    assert tc.grad_check(f, rng.normal(size=(4, 8))) < 1e-4


# ---------------------------------------------------------------- totals

def test_total_loss_arithmetic():
    one = tc.constant(1.0)
    total, report = pt.total_loss(one, {}, lam=0.0)
    assert report.l_total == report.l_contrast == 1.0

    total, report = pt.total_loss(one, {"D": tc.constant(2.0)}, lam=1.0)
    assert report.l_total == 3.0

    total, report = pt.total_loss(one, {"D": tc.constant(2.0),
                                        "G": tc.constant(4.0)}, lam=1.0)
    assert report.l_total == 4.0
    assert report.l_recon == 3.0
    assert abs(report.l_total
               - (report.l_contrast + report.lam * report.l_recon)) < 1e-9


# ---------------------------------------------------------------- retrieval

def test_retrieval_eval_identity(rng):
    x = rng.normal(size=(20, 8))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    res = pt.retrieval_eval(x, x)
    assert res["top1"] == 1.0
    assert res["macro_f1"] == 1.0


def test_retrieval_eval_permuted(rng):
    accs = []
    for trial in range(30):
        x = np.random.default_rng(trial).normal(size=(100, 16))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        perm = np.random.default_rng(1000 + trial).permutation(100)
        accs.append(pt.retrieval_eval(x, x[perm])["top1"])
    assert abs(float(np.mean(accs)) - 0.01) < 0.03


def test_retrieval_eval_single():
    v = np.array([[1.0, 0.0]])
    assert pt.retrieval_eval(v, v)["top1"] == 1.0


def test_retrieval_eval_count_mismatch(rng):
    a = rng.normal(size=(3, 4))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    with pytest.raises(pt.CountMismatchError):
        pt.retrieval_eval(a, a[:2])


# ---------------------------------------------------------------- fit loop

@pytest.fixture(scope="module")
def mini_fit(vocab):
    cfg = en.EncoderConfig(d_model=16, n_layers=1, n_heads=2, ffn_dim=32,
                           d_g=12, gnn_layers=2, d_s=12,
                           interaction_layers=2, fp_embed_dim=12,
                           fp_heads=2, fp_ffn=24, fp_seq_len=32,
                           d_shared=12, max_seq_len=96)
    texts = cc.synthesize_corpus(24, seed=21)
    records = [cc.PolymerRecord(psmiles=t) for t in texts]
    cc.featurize_dataset(records, vocab=vocab, fp_bits=cfg.fp_seq_len)
    pcfg = pt.PretrainConfig(epochs=4, batch=6, accum=1, lr=3e-3,
                             warmup_epochs=1, seed=1, val_fraction=0.2,
                             patience=10)
    store, history = pt.fit(records, cfg, pcfg, vocab=vocab)
    return cfg, records, store, history


def test_fit_history_decomposition(mini_fit):
    _, _, _, history = mini_fit
    assert len(history.epochs) == 4
    for stats in history.epochs:
        assert abs(stats.l_total
                   - (stats.l_contrast + stats.l_recon)) < 1e-9
    tsv = history.to_tsv()
    assert tsv.splitlines()[0].startswith("epoch\t")
    assert len(tsv.splitlines()) == 5


def test_fit_best_val_tracked(mini_fit):
    _, _, _, history = mini_fit
    vals = [e.val_total for e in history.epochs]
    assert history.best_val == min(vals)
    assert history.best_epoch == int(np.argmin(vals))


def test_fit_empty_corpus(tiny_cfg):
    with pytest.raises(pt.EmptyCorpusError):
        pt.fit([], tiny_cfg, pt.PretrainConfig(epochs=1))


def test_patience_semantics(monkeypatch, vocab):
    # force validation to worsen every epoch: patience 3 stops by epoch 4
    calls = {"n": 0}

    def fake_stats(*args, **kwargs):
        calls["n"] += 1
        return float(calls["n"]), 0.0

    import polylab.pretrain.loop as loop

    monkeypatch.setattr(loop, "_validation_stats", fake_stats)
    cfg = en.EncoderConfig(d_model=8, n_layers=1, n_heads=2, ffn_dim=12,
                           d_g=6, gnn_layers=1, d_s=6,
                           interaction_layers=1, fp_embed_dim=6,
                           fp_heads=2, fp_ffn=10, fp_seq_len=16,
                           d_shared=6, max_seq_len=64)
    texts = cc.synthesize_corpus(8, seed=2)
    records = [cc.PolymerRecord(psmiles=t) for t in texts]
    cc.featurize_dataset(records, vocab=vocab, fp_bits=cfg.fp_seq_len)
    pcfg = pt.PretrainConfig(epochs=20, batch=4, accum=1, patience=3,
                             warmup_epochs=0, seed=0)
    _, history = pt.fit(records, cfg, pcfg, vocab=vocab)
    assert len(history.epochs) == 4   # epoch 0 best, then 3 worsening
