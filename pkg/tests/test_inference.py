import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from etm.clustering import PseudoTextSet
from etm.embeddings import EmbeddingTable
from etm.inference import (
    KERNELS,
    ModelParams,
    TopicEstimates,
    TopicModelState,
    assign_short_text,
    build_neighbors,
    empty_neighbors,
    estimate,
    generate_synthetic,
    gibbs_conditional,
    gibbs_weights,
    run_gibbs,
    token_layout,
    top_words,
)
from conftest import make_corpus, random_table
from oracles import lda_conditional, lda_log_joint, mrf_conditional, reference_lda


def random_instance(rng, L=3, V=6, K=3, max_len=8, threshold=0.8, dim=2):
    words = [f"w{i}" for i in range(V)]
    docs = [list(rng.integers(0, V, size=rng.integers(1, max_len + 1))) for _ in range(L)]
    corpus = make_corpus(docs, words)
    pseudo = PseudoTextSet(tuple(range(L)), L)
    table = random_table(rng, words[: V - 1], dim)  # last word has no embedding
    neighbors = build_neighbors(pseudo, corpus, table, threshold)
    z = rng.integers(0, K, size=len(neighbors.layout.words))
    state = TopicModelState.from_assignments(neighbors.layout, z, K, V)
    return corpus, pseudo, table, neighbors, state


# --- neighbor sets -------------------------------------------------------


def pair_table():
    return EmbeddingTable({"u": 0, "v": 1, "far": 2}, np.array([[1.0, 0.0], [0.7, math.sqrt(1 - 0.49)], [-1.0, 0.1]]))


def test_single_pair_neighbors():
    corpus = make_corpus([[0, 1]], ["u", "v", "far"])
    nb = build_neighbors(PseudoTextSet((0,), 1), corpus, pair_table(), 0.4)
    assert nb.of(0, 0) == {1} and nb.of(0, 1) == {0}
    assert nb.edge_counts.tolist() == [1]


def test_threshold_zero_has_no_edges():
    corpus = make_corpus([[0, 0, 1, 2]], ["u", "v", "far"])
    nb = build_neighbors(PseudoTextSet((0,), 1), corpus, pair_table(), 0.0)
    assert len(nb.indices) == 0


def test_threshold_two_is_complete_on_embedded_positions():
    corpus = make_corpus([[0, 0, 1, 2, 3], [1, 3]], ["u", "v", "far", "oov"])
    nb = build_neighbors(PseudoTextSet((0, 0), 1), corpus, pair_table(), 2.0)
    embedded = {0, 1, 2, 3, 5}  # positions of u, u, v, far, v; position 4 and 6 are oov
    for i in range(7):
        expected = embedded - {i} if i in embedded else set()
        assert nb.of(0, i) == expected
    assert nb.edge_counts.tolist() == [10]


def test_repeated_words_are_connected():
    corpus = make_corpus([[2, 2]], ["u", "v", "far"])
    nb = build_neighbors(PseudoTextSet((0,), 1), corpus, pair_table(), 0.1)
    assert nb.of(0, 0) == {1}


def test_neighbors_stay_within_pseudo_text():
    corpus = make_corpus([[0], [0], [1]], ["u", "v", "far"])
    nb = build_neighbors(PseudoTextSet((0, 1, 0), 2), corpus, pair_table(), 0.4)
    assert nb.of(0, 0) == {1}  # pseudo-text 0 holds texts 0 and 2
    assert nb.of(1, 0) == set()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 2.0))
def test_neighbor_symmetry_and_no_self_loops(seed, threshold):
    rng = np.random.default_rng(seed)
    _, _, _, nb, _ = random_instance(rng, threshold=threshold)
    for l in range(nb.layout.L):
        n_l = int(nb.layout.offsets[l + 1] - nb.layout.offsets[l])
        total = 0
        for i in range(n_l):
            ni = nb.of(l, i)
            assert i not in ni
            assert all(i in nb.of(l, j) for j in ni)
            total += len(ni)
        assert total == 2 * nb.edge_counts[l]


# --- conditional ---------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 3.0))
def test_conditional_is_a_distribution_and_matches_lda_at_lambda_zero(seed, lam):
    rng = np.random.default_rng(seed)
    _, _, _, nb, state = random_instance(rng)
    params = ModelParams(K=3, lam=lam)
    flat = nb.layout
    for p in range(len(flat.words)):
        l = int(flat.docs[p])
        i = p - int(flat.offsets[l])
        with state.excluded(l, i):
            probs = gibbs_conditional(state, nb, params, l, i)
            plain = gibbs_conditional(state, nb, ModelParams(K=3, lam=0.0), l, i)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(probs > 0)
        expected = lda_conditional(state.z.tolist(), flat.words.tolist(), flat.docs.tolist(), p, 3, 6, 0.1, 0.1)
        np.testing.assert_allclose(plain, expected, rtol=0, atol=1e-12)


def test_single_topic_is_certain():
    rng = np.random.default_rng(1)
    _, _, _, nb, _ = random_instance(rng, K=1)
    z = np.zeros(len(nb.layout.words), dtype=np.int64)
    state = TopicModelState.from_assignments(nb.layout, z, 1, 6)
    with state.excluded(0, 0):
        assert gibbs_conditional(state, nb, ModelParams(K=1), 0, 0).tolist() == [1.0]


def test_conditional_matches_term_by_term_evaluation():
    rng = np.random.default_rng(5)
    for _ in range(200):
        V, K = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        n = int(rng.integers(1, 7))
        corpus = make_corpus([list(rng.integers(0, V, size=n))], [f"w{i}" for i in range(V)])
        table = random_table(rng, list(corpus.vocabulary), dim=2)
        nb = build_neighbors(PseudoTextSet((0,), 1), corpus, table, float(rng.uniform(0, 2)))
        state = TopicModelState.from_assignments(nb.layout, rng.integers(0, K, size=n), K, V)
        params = ModelParams(K=K, alpha=float(rng.uniform(0.05, 2)), beta=float(rng.uniform(0.01, 1)), lam=float(rng.uniform(0, 3)))
        i = int(rng.integers(n))
        with state.excluded(0, i):
            got = gibbs_conditional(state, nb, params, 0, i)
        want = mrf_conditional(state.z.tolist(), nb.layout.words.tolist(), i, nb.of(0, i), K, V, params.alpha, params.beta, params.lam)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


def test_lambda_zero_conditional_is_ratio_of_joints():
    rng = np.random.default_rng(9)
    _, _, _, nb, state = random_instance(rng, L=2, V=4, K=3, max_len=5)
    flat = nb.layout
    words, docs = flat.words.tolist(), flat.docs.tolist()
    for p in range(len(words)):
        l = docs[p]
        i = p - int(flat.offsets[l])
        with state.excluded(l, i):
            got = gibbs_conditional(state, nb, ModelParams(K=3, lam=0.0), l, i)
        logs = []
        for k in range(3):
            z = state.z.tolist()
            z[p] = k
            logs.append(lda_log_joint(z, words, docs, 2, 3, 4, 0.1, 0.1))
        want = np.exp(np.array(logs) - max(logs))
        np.testing.assert_allclose(got, want / want.sum(), atol=1e-12)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_tilt_multiplies_by_exp_lambda(lam):
    corpus = make_corpus([[0, 0, 0, 0, 1]], ["u", "v", "far"])
    nb = build_neighbors(PseudoTextSet((0,), 1), corpus, pair_table(), 0.5)
    params = ModelParams(K=2, lam=lam)
    # token 0 neighbours every other position; either none or all of them sit in topic 0
    away = TopicModelState.from_assignments(nb.layout, np.array([0, 1, 1, 1, 1]), 2, 3)
    toward = TopicModelState.from_assignments(nb.layout, np.array([1, 0, 0, 0, 0]), 2, 3)
    for state, share in ((away, 0.0), (toward, 1.0)):
        with state.excluded(0, 0):
            tilted = gibbs_weights(state, nb, params, 0, 0)
            base = gibbs_weights(state, nb, ModelParams(K=2, lam=0.0), 0, 0)
        assert tilted[0] / base[0] == pytest.approx(math.exp(lam * share), rel=1e-12)


# --- sampler -------------------------------------------------------------


def test_counts_stay_consistent_every_sweep():
    rng = np.random.default_rng(2)
    corpus, pseudo, _, nb, _ = random_instance(rng, L=4, V=8, K=3, max_len=12)
    checked = []
    run_gibbs(pseudo, corpus, nb, ModelParams(K=3, iterations=25, seed=1),
              on_sweep=lambda it, s: checked.append(s.is_consistent()))
    assert checked == [True] * 25


def test_deterministic_given_seed():
    rng = np.random.default_rng(3)
    corpus, pseudo, _, nb, _ = random_instance(rng, L=4, V=8, K=3, max_len=12)
    params = ModelParams(K=3, iterations=20, seed=5)
    a = run_gibbs(pseudo, corpus, nb, params)
    b = run_gibbs(pseudo, corpus, nb, params)
    assert np.array_equal(a.z, b.z)
    c = run_gibbs(pseudo, corpus, nb, ModelParams(K=3, iterations=20, seed=6))
    assert not np.array_equal(a.z, c.z)


@pytest.mark.skipif("compiled" not in KERNELS, reason="compiled kernel not built")
@pytest.mark.parametrize("lam", [0.0, 1.0, 2.5])
def test_compiled_and_python_kernels_agree(lam):
    rng = np.random.default_rng(4)
    corpus, pseudo, _, nb, _ = random_instance(rng, L=5, V=10, K=4, max_len=30, threshold=1.0)
    params = ModelParams(K=4, iterations=30, seed=2, lam=lam)
    a = run_gibbs(pseudo, corpus, nb, params, backend="compiled")
    b = run_gibbs(pseudo, corpus, nb, params, backend="python")
    assert np.array_equal(a.z, b.z)
    assert np.array_equal(a.n_kw, b.n_kw)


def test_unknown_backend():
    rng = np.random.default_rng(0)
    corpus, pseudo, _, nb, _ = random_instance(rng)
    with pytest.raises(ValueError, match="backend"):
        run_gibbs(pseudo, corpus, nb, ModelParams(K=2, iterations=1), backend="gpu")


def two_topic_planted(seed):
    phi = np.zeros((2, 20))
    phi[0, :10] = 0.1
    phi[1, 10:] = 0.1
    theta = np.array([[0.9, 0.1] if l % 2 else [0.1, 0.9] for l in range(20)])
    return generate_synthetic(ModelParams(K=2), 20, 80, phi, theta, seed)


def word_partition(n_kw):
    groups = np.argmax(n_kw, axis=0)
    return groups if groups[0] == 0 else 1 - groups


def test_lambda_zero_agrees_with_reference_lda():
    planted = np.array([0] * 10 + [1] * 10)
    for seed in range(5):
        pseudo, corpus = two_topic_planted(seed)
        state = run_gibbs(pseudo, corpus, None, ModelParams(K=2, lam=0.0, iterations=200, seed=seed))
        docs = [list(corpus.texts[l].tokens) for l in range(corpus.n)]
        _, ref_kw = reference_lda(docs, 2, 20, 0.1, 0.1, 200, seed)
        ours, theirs = word_partition(state.n_kw), word_partition(np.array(ref_kw))
        assert np.mean(ours == theirs) >= 0.95
        assert np.mean(ours == planted) >= 0.95


def test_averaged_estimates():
    pseudo, corpus = two_topic_planted(0)
    params = ModelParams(K=2, iterations=30, burn_in=10, average_samples=True)
    state = run_gibbs(pseudo, corpus, None, params)
    assert state.n_samples == 20
    est = estimate(state, params)
    np.testing.assert_allclose(est.phi.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(est.theta.sum(axis=1), 1.0, atol=1e-9)


# --- estimates, assignment, top words -----------------------------------


def test_estimate_all_zero_counts_is_uniform():
    layout = token_layout(PseudoTextSet((), 1), make_corpus([], ["a", "b", "c"]))
    state = TopicModelState.from_assignments(layout, np.empty(0, dtype=np.int64), 4, 3)
    est = estimate(state, ModelParams(K=4))
    np.testing.assert_allclose(est.phi, 1 / 3)
    np.testing.assert_allclose(est.theta, 1 / 4)


def test_estimate_single_token():
    corpus = make_corpus([[1]], ["a", "b"])
    layout = token_layout(PseudoTextSet((0,), 1), corpus)
    state = TopicModelState.from_assignments(layout, np.array([0]), 2, 2)
    est = estimate(state, ModelParams(K=2, beta=0.01))
    assert est.phi[0, 1] == pytest.approx(1.01 / 1.02, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_estimates_are_row_stochastic(seed):
    rng = np.random.default_rng(seed)
    _, _, _, _, state = random_instance(rng, L=int(rng.integers(1, 5)), K=int(rng.integers(1, 5)))
    est = estimate(state, ModelParams(K=state.K, alpha=float(rng.uniform(0.01, 2)), beta=float(rng.uniform(0.01, 2))))
    np.testing.assert_allclose(est.phi.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(est.theta.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(est.phi > 0) and np.all(est.theta > 0)


def test_assign_single_topic_and_single_word():
    est = TopicEstimates(np.array([[0.2, 0.8]]), np.ones((1, 1)))
    assert assign_short_text([0, 1], est)[0] == 0
    topic, scores = assign_short_text([0, 1], est)
    assert scores.tolist() == [1.0]
    est = TopicEstimates(np.array([[0.5, 0.5], [0.9, 0.1], [0.1, 0.9]]), np.ones((1, 3)) / 3)
    assert assign_short_text([1], est)[0] == 2


def test_assign_skips_unknown_tokens_and_rejects_all_unknown():
    est = TopicEstimates(np.array([[0.9, 0.1], [0.1, 0.9]]), np.ones((1, 2)) / 2)
    assert assign_short_text([None, 1, 7], est)[0] == 1
    with pytest.raises(ValueError):
        assign_short_text([None, 5], est)
    with pytest.raises(ValueError):
        assign_short_text([], est)


def test_assign_ties_go_to_lowest_topic():
    est = TopicEstimates(np.array([[0.5, 0.5], [0.5, 0.5]]), np.ones((1, 2)) / 2)
    assert assign_short_text([0, 1], est)[0] == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_log_space_agrees_with_direct_product_and_ignores_order(seed):
    rng = np.random.default_rng(seed)
    K, V = int(rng.integers(1, 5)), int(rng.integers(2, 8))
    phi = rng.dirichlet(np.ones(V), size=K)
    est = TopicEstimates(phi, np.ones((1, K)) / K)
    tokens = list(rng.integers(0, V, size=rng.integers(1, 6)))
    direct = np.array([np.prod([phi[k, w] for w in tokens]) for k in range(K)])
    topic, scores = assign_short_text(tokens, est)
    assert topic == int(np.argmax(direct))
    np.testing.assert_allclose(scores, direct / direct.sum(), rtol=1e-9)
    assert assign_short_text(tokens[::-1], est)[0] == topic


def test_top_words():
    vocab = ("delta", "alpha", "charlie", "bravo")
    est = TopicEstimates(np.array([[0.25] * 4, [0.1, 0.4, 0.4, 0.1]]), np.ones((1, 2)) / 2, vocab)
    assert top_words(est, 0, 2) == ["alpha", "bravo"]
    assert top_words(est, 1, 3) == ["alpha", "charlie", "bravo"]
    assert sorted(top_words(est, 1, 4)) == sorted(vocab)
    with pytest.raises(IndexError):
        top_words(est, 2)


# --- generator -----------------------------------------------------------


def test_generator_disjoint_supports_one_hot_theta():
    phi = np.zeros((3, 9))
    for k in range(3):
        phi[k, 3 * k:3 * k + 3] = 1 / 3
    theta = np.eye(3)[[0, 1, 2, 1]]
    pseudo, corpus = generate_synthetic(ModelParams(K=3), 4, 25, phi, theta, seed=1)
    assert pseudo.assignment == (0, 1, 2, 3)
    for l, text in enumerate(corpus.texts):
        k = int(np.argmax(theta[l]))
        assert set(text.tokens) <= set(range(3 * k, 3 * k + 3))
        assert text.gold_label == k
        assert len(text.tokens) == 25


def test_generator_law_of_large_numbers():
    rng = np.random.default_rng(0)
    phi = rng.dirichlet(np.ones(30), size=4)
    theta = rng.dirichlet(np.ones(4), size=1)
    _, corpus = generate_synthetic(ModelParams(K=4), 1, 100_000, phi, theta, seed=3)
    freq = np.bincount(corpus.texts[0].tokens, minlength=30) / 100_000
    assert 0.5 * np.abs(freq - theta[0] @ phi).sum() < 0.02


def test_generator_seed_determinism_and_validation():
    phi = np.full((2, 4), 0.25)
    theta = np.full((3, 2), 0.5)
    a = generate_synthetic(ModelParams(K=2), 3, 10, phi, theta, seed=9)
    assert a == generate_synthetic(ModelParams(K=2), 3, 10, phi, theta, seed=9)
    with pytest.raises(ValueError):
        generate_synthetic(ModelParams(K=2), 3, 10, phi * 2, theta, seed=9)
    with pytest.raises(ValueError):
        generate_synthetic(ModelParams(K=2), 3, 10, phi, -theta, seed=9)
    with pytest.raises(ValueError):
        generate_synthetic(ModelParams(K=3), 3, 10, phi, theta, seed=9)


def test_planted_top_words_lie_in_support():
    pseudo, corpus = two_topic_planted(4)
    params = ModelParams(K=2, iterations=200, seed=4)
    est = estimate(run_gibbs(pseudo, corpus, None, params), params, corpus.vocabulary)
    supports = [set(corpus.vocabulary[:10]), set(corpus.vocabulary[10:])]
    for k in range(2):
        top = set(top_words(est, k, 5))
        assert any(top <= s for s in supports)


def test_params_validation():
    for bad in (dict(K=0), dict(K=2, alpha=0), dict(K=2, beta=-1), dict(K=2, lam=-0.1), dict(K=2, corr_threshold=2.5)):
        with pytest.raises(ValueError):
            ModelParams(**bad)


def test_empty_neighbors_shape():
    rng = np.random.default_rng(0)
    _, _, _, nb, _ = random_instance(rng)
    e = empty_neighbors(nb.layout)
    assert len(e.indptr) == len(nb.layout.words) + 1 and len(e.indices) == 0


def test_environment_forces_python_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, ETM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from etm.inference import BACKEND; print(BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


def test_model_dump_round_trip(tmp_path):
    from etm.model_io import load_model, save_model

    pseudo, corpus = two_topic_planted(1)
    params = ModelParams(K=2, iterations=20, seed=3)
    state = run_gibbs(pseudo, corpus, None, params)
    est = estimate(state, params, corpus.vocabulary)
    save_model(tmp_path / "m.json", params, state, est, pseudo, corpus.vocabulary)
    dump = load_model(tmp_path / "m.json")
    assert dump.params == params and dump.pseudo_texts == pseudo
    assert dump.vocabulary == corpus.vocabulary
    assert [t for zl in dump.z for t in zl] == state.z.tolist()
    assert np.array_equal(dump.estimates.phi, est.phi) and np.array_equal(dump.estimates.theta, est.theta)
    (tmp_path / "bad.json").write_text('{"format": "other"}')
    with pytest.raises(ValueError):
        load_model(tmp_path / "bad.json")
