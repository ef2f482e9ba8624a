"""Composed model: ablation wiring, parameter groups, predictions."""

import numpy as np
import pytest

from offgraph.corpus import build_vocab, encode, split_corpus
from offgraph.graph import build_graph, with_node_features
from offgraph.model import ABLATIONS, DetectionModel
from offgraph.synthetic import generate_corpus
from offgraph.training import TrainConfig


@pytest.fixture(scope="module")
def setting():
    corpus = generate_corpus(120, 20, seed=4)
    split = split_corpus(corpus, 0.7, rng_seed=0)
    vocab = build_vocab(split.train)
    graph = with_node_features(build_graph(corpus), split.train, "soft", "nonoff")
    seqs = [encode(t, vocab, 24) for t in split.test[:6]]
    return corpus, vocab, graph, seqs


def _config(**kw):
    base = dict(
        gat_hidden=16, gat_heads=4, d_model=16, encoder_layers=1, encoder_heads=2,
        d_ff=24, max_len=24, fusion_heads=2,
    )
    base.update(kw)
    return TrainConfig(**base).validate()


def _model(setting, **kw):
    _, vocab, graph, _ = setting
    cfg = _config(**kw)
    return DetectionModel(cfg, len(vocab), 2, np.random.default_rng(0)), graph


def test_unknown_ablation_rejected(setting):
    _, vocab, _, _ = setting
    with pytest.raises(ValueError, match="ablation"):
        DetectionModel(_config(ablation="nope"), len(vocab), 2, np.random.default_rng(0))


def test_parameter_groups_partition(setting):
    model, _ = _model(setting)
    gat_group, rest = model.parameter_groups()
    named = model.named_parameters()
    assert len(gat_group) + len(rest) == len(named)
    ids = {id(t) for t in gat_group} | {id(t) for t in rest}
    assert len(ids) == len(named)
    assert {id(t) for t in gat_group} == {id(t) for n, t in named.items() if n.startswith("gat.")}


def test_predictions_in_unit_interval(setting):
    _, _, graph, seqs = setting
    model, _ = _model(setting)
    probs = model.predict(seqs, graph)
    assert probs.shape == (len(seqs),)
    assert np.all((probs > 0) & (probs < 1))


def test_no_gat_has_fewer_parameters(setting):
    full, _ = _model(setting)
    nog, _ = _model(setting, ablation="no_gat")
    count = lambda m: sum(t.size for t in m.named_parameters().values())
    assert count(nog) < count(full)
    assert not any(n.startswith("gat.") for n in nog.named_parameters())


def test_no_encoder_predicts_by_author_only(setting):
    _, _, graph, seqs = setting
    model, _ = _model(setting, ablation="no_encoder")
    same_author = [s for s in seqs]
    a, b = same_author[0], same_author[1]
    b.author_id = a.author_id
    probs = model.predict([a, b], graph)
    assert probs[0] == probs[1]


def test_no_gat_residual_drops_one_row(setting):
    model, graph = _model(setting, ablation="no_gat_residual")
    assert model.gat.residual_proj is None
    emb = model.user_embeddings(graph)
    assert emb.shape[1] == model.gat.num_heads * model.gat.head_dim


def test_single_head_gat_keeps_width(setting):
    model, graph = _model(setting, ablation="single_head_gat")
    assert model.gat.num_heads == 1
    assert model.gat.head_dim == 16
    emb = model.user_embeddings(graph)
    assert emb.shape[1] == 2 * 16  # one head plus the residual projection


def test_no_attention_layer_uses_wide_ffn(setting):
    model, _ = _model(setting, ablation="no_attention_layer")
    assert model.fusion.wq is None
    assert model.fusion.ffn_w.shape[0] == 2 * 16


def test_all_ablations_forward(setting):
    _, vocab, graph, seqs = setting
    for ablation in ABLATIONS:
        model = DetectionModel(_config(ablation=ablation), len(vocab), 2, np.random.default_rng(1))
        probs = model.predict(seqs[:2], graph)
        assert np.all(np.isfinite(probs)), ablation


def test_no_gat_structurally_equals_full_without_user_rows(setting):
    """Dropping the author rows from the full model's fusion reproduces the
    text-only ablation exactly, once the shared parameters agree."""
    _, vocab, graph, seqs = setting
    full = DetectionModel(_config(), len(vocab), 2, np.random.default_rng(2))
    nog = DetectionModel(_config(ablation="no_gat"), len(vocab), 2, np.random.default_rng(3))
    shared = {n: v for n, v in full.state_arrays().items() if not n.startswith("gat.")}
    shared.pop("fusion.head_adapter")
    shared.pop("fusion.residual_adapter")
    state = nog.state_arrays()
    state.update(shared)
    nog.load_state_arrays(state)

    want = nog.predict(seqs[:3], graph)
    got = np.array([full.tweet_probability(s, None, None).item() for s in seqs[:3]])
    assert np.array_equal(got, want)


def test_state_roundtrip_and_validation(setting):
    model, graph = _model(setting)
    _, _, _, seqs = setting
    state = model.state_arrays()
    other, _ = _model(setting)
    other.load_state_arrays(state)
    assert np.array_equal(other.predict(seqs, graph), model.predict(seqs, graph))
    state.pop("fusion.clf_b")
    with pytest.raises(ValueError, match="clf_b"):
        other.load_state_arrays(state)
