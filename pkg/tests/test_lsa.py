import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from sarclab.classifiers import make_classifier
from sarclab.corpus import Document, Vocabulary
from sarclab.exceptions import DomainError, ModelFileError, RankClampWarning, ValidationError
from sarclab.linalg import frobenius_distance, hellinger_distance, svd, truncate
from sarclab.lsa import (
    LatentSemanticAnalysis,
    append_star,
    build_term_document_matrix,
    induce_space,
    probability_amplitude,
    probability_distribution,
    statistical_normalize,
    tfidf_transform,
)
from sarclab.model_io import load_model, save_model
from sarclab.synthetic import separable_corpus


def _tdm(texts, tokens):
    return build_term_document_matrix(texts, Vocabulary(tuple(tokens)))


def test_term_document_counts():
    tdm = _tdm(["a b a", "b"], "ab")
    np.testing.assert_array_equal(tdm.counts.toarray(), [[2, 0], [1, 1]])
    assert tdm.n_docs == 2
    assert _tdm(["x"], "x").counts.toarray().tolist() == [[1]]


def test_out_of_vocabulary_column_is_zero():
    tdm = _tdm(["a", "zzz qqq"], "a")
    np.testing.assert_array_equal(tdm.counts.toarray(), [[1, 0]])


def test_column_sums_are_token_counts():
    texts = ["the cat sat", "the the dog !"]
    tdm = _tdm(texts, ["the", "cat", "sat", "dog", "!"])
    np.testing.assert_array_equal(np.asarray(tdm.counts.sum(axis=0)).ravel(), [3, 4])


def test_empty_corpus_rejected():
    with pytest.raises(ValidationError):
        _tdm([], "a")


def test_tfidf_example():
    M, idf = tfidf_transform(_tdm(["a b a", "b"], "ab"))
    np.testing.assert_allclose(idf, [np.log(2), 0.0])
    np.testing.assert_allclose(M.toarray(), [[2 * np.log(2), 0], [0, 0]])
    assert M.toarray()[0, 0] == pytest.approx(1.3863, abs=1e-4)


def test_tfidf_single_document_is_zero():
    M, idf = tfidf_transform(_tdm(["a b c"], "abc"))
    assert not idf.any() and M.nnz == 0


def test_statistical_normalize_examples():
    tdm = build_term_document_matrix(["a b", "a a"], Vocabulary(("a", "b")))
    Q, total = statistical_normalize(tdm)
    assert total == 4
    np.testing.assert_allclose(Q.toarray(), [[0.25, 0.5], [0.25, 0.0]])
    Q, _ = statistical_normalize(_tdm(["a a a a"], "a"))
    np.testing.assert_allclose(Q.toarray(), [[1.0]])


def test_statistical_normalize_sums_to_one():
    rng = np.random.default_rng(0)
    from sarclab.lsa import TermDocumentMatrix
    for _ in range(20):
        counts = sp.csc_matrix(rng.integers(0, 9, size=(15, 11)))
        Q, _ = statistical_normalize(TermDocumentMatrix(Vocabulary(tuple(map(str, range(15)))), counts))
        assert abs(Q.sum() - 1) <= 1e-12


def test_statistical_normalize_all_zero():
    with pytest.raises(DomainError):
        statistical_normalize(_tdm(["zzz"], "a"))


def test_probability_amplitude_examples():
    np.testing.assert_allclose(probability_amplitude([[3, 4], [0, -1]]), [[0.6, 0.8], [0, 0]])
    np.testing.assert_allclose(probability_amplitude([[1.0]]), [[1.0]])
    with pytest.raises(DomainError):
        probability_amplitude([[0.0, -2.0]])


def test_probability_distribution_examples():
    np.testing.assert_allclose(probability_distribution([[0.6, 0.8], [0, 0]]), [[0.36, 0.64], [0, 0]])
    np.testing.assert_array_equal(probability_distribution(np.zeros((2, 2))), np.zeros((2, 2)))


def test_amplitude_and_distribution_normalization():
    rng = np.random.default_rng(1)
    for _ in range(50):
        psi = probability_amplitude(rng.normal(size=(10, 8)))
        assert abs(np.sum(psi ** 2) - 1) <= 1e-12
        assert abs(probability_distribution(psi).sum() - 1) <= 1e-12


def _psi_q(rng, shape=(10, 8)):
    A = rng.integers(0, 5, size=shape).astype(float)
    Q = A / A.sum()
    return Q, np.sqrt(Q)


def test_normalized_hellinger_bounded_by_frobenius():
    # With the conventional 1/sqrt(2) factor the bound holds at every rank.
    rng = np.random.default_rng(2)
    for _ in range(200):
        Q, psi = _psi_q(rng)
        f = svd(psi)
        for r in range(1, f.k + 1):
            xi = truncate(f, r).reconstruct()
            d_h = hellinger_distance(probability_distribution(probability_amplitude(xi)), Q) / np.sqrt(2)
            assert d_h <= frobenius_distance(xi, psi) + 1e-12


def test_unnormalized_hellinger_exceeds_frobenius_at_rank_one():
    # The rank-1 truncation is non-negative, so renormalising it moves it by
    # 2 sin(theta/2) on the unit sphere while the residual is only sin(theta).
    rng = np.random.default_rng(3)
    Q, psi = _psi_q(rng)
    xi = truncate(svd(psi), 1).reconstruct()
    d_h = hellinger_distance(probability_distribution(probability_amplitude(xi)), Q)
    d_f = frobenius_distance(xi, psi)
    cos = np.sum(xi * psi) / np.linalg.norm(xi)
    theta = np.arccos(cos)
    assert d_h == pytest.approx(2 * np.sin(theta / 2), rel=1e-9)
    assert d_f == pytest.approx(np.sin(theta), rel=1e-9)
    assert d_h > d_f


def test_rank_monotonicity():
    rng = np.random.default_rng(4)
    _, psi = _psi_q(rng, (12, 9))
    f = svd(psi)
    residuals = [frobenius_distance(truncate(f, r).reconstruct(), psi) for r in range(1, f.k + 1)]
    assert all(b <= a + 1e-15 for a, b in zip(residuals, residuals[1:]))


def _docs(corpus):
    return corpus.texts


@pytest.mark.parametrize("variant", ["traditional", "statistical"])
def test_fold_in_reproduces_training_rows(variant):
    corpus = separable_corpus(30, vocab_size=40, seed=5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankClampWarning)
        space, V = induce_space(corpus.texts, variant, r=1000)
    vectors, zero = space.fold_in(corpus.texts)
    assert not zero.any()
    np.testing.assert_allclose(vectors, V, atol=1e-8)


@pytest.mark.parametrize("variant", ["traditional", "statistical"])
def test_fold_in_truncated_matches_v_rows(variant):
    corpus = separable_corpus(40, seed=6)
    space, V = induce_space(corpus.texts, variant, r=5)
    np.testing.assert_allclose(space.fold_in(corpus.texts)[0], V, atol=1e-10)


def test_statistical_full_rank_reconstructs_amplitude():
    corpus = separable_corpus(12, vocab_size=8, seed=7)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankClampWarning)
        space, V = induce_space(corpus.texts, "statistical", r=100)
    tdm = build_term_document_matrix(corpus.texts, space.vocabulary)
    Q, _ = statistical_normalize(tdm)
    xi = space.U @ np.diag(space.sigma) @ V.T
    np.testing.assert_allclose(xi, np.sqrt(Q.toarray()), atol=1e-8)


def test_toy_corpus_shape():
    space, V = induce_space(["a b c", "b c d", "d e"], "statistical", r=2)
    assert V.shape == (3, 2) and space.rank == 2


def test_rank_clamp_warns():
    with pytest.warns(RankClampWarning, match="clamped"):
        space, V = induce_space(["a b", "b c"], "statistical", r=10)
    assert space.rank == 2 and V.shape == (2, 2)


def test_degenerate_traditional_matrix():
    with pytest.raises(DomainError):
        induce_space(["a b", "a b"], "traditional", r=2)


def test_empty_and_unseen_documents_fold_to_flagged_zero():
    space, _ = induce_space(["a b c", "c d"], "traditional", r=2)
    vectors, zero = space.fold_in(["", "never seen", "a never"])
    np.testing.assert_array_equal(zero, [True, True, False])
    assert not vectors[:2].any()
    np.testing.assert_array_equal(vectors[2], space.fold_in(["a"])[0][0])


def test_statistical_fold_in_component_bound():
    corpus = separable_corpus(60, seed=8)
    space, _ = induce_space(corpus.texts, "statistical", r=8)
    probe = ["pos1 pos1 neg3 the2", "the0", "pos5 " * 30]
    vectors, _ = space.fold_in(probe)
    q = space.encode(build_term_document_matrix(probe, space.vocabulary).counts)
    q_norm = np.sqrt(np.asarray(q.multiply(q).sum(axis=0)).ravel())
    assert np.all(np.isfinite(vectors))
    assert np.all(np.abs(vectors) <= (q_norm / space.sigma[-1])[:, None] + 1e-12)


def test_append_star():
    np.testing.assert_array_equal(append_star([0.1, 0.2], 5), [0.1, 0.2, 5.0])
    np.testing.assert_array_equal(append_star([0.0], 1), [0.0, 1.0])
    assert append_star(append_star([0.0], 1), 2).shape == (3,)
    with pytest.raises(ValidationError):
        append_star([0.0], 6)
    with pytest.raises(ValidationError):
        append_star(np.zeros((2, 2)), [1])


def test_estimator_wrapper():
    corpus = separable_corpus(50, seed=9)
    lsa = LatentSemanticAnalysis(variant="traditional", n_components=6)
    X = lsa.fit_transform(corpus.texts)
    assert X.shape == (50, 6) and lsa.rank_ == 6
    np.testing.assert_allclose(lsa.transform(corpus.texts), X, atol=1e-10)
    assert lsa.get_params()["variant"] == "traditional"


@pytest.mark.parametrize("variant", ["traditional", "statistical"])
@pytest.mark.parametrize("name", ["logistic", "svm", "random_forest", "gradient_boosting"])
def test_model_round_trip(tmp_path, variant, name):
    corpus = separable_corpus(60, seed=10)
    space, V = induce_space(corpus.texts, variant, r=6)
    clf = make_classifier(name, space.rank, seed=0, **({"n_estimators": 5} if name in ("random_forest", "gradient_boosting") else {}))
    clf.fit(V, corpus.labels)
    path = tmp_path / "m.json"
    save_model(path, space, clf, name)
    loaded = load_model(path)
    np.testing.assert_array_equal(loaded.space.U, space.U)
    np.testing.assert_array_equal(loaded.space.sigma, space.sigma)
    probe = ["pos1 neg2 the3", ""]
    a, _ = space.fold_in(probe)
    b, _ = loaded.space.fold_in(probe)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(loaded.classifier.predict(V), clf.predict(V))


def test_model_file_errors(tmp_path):
    space, _ = induce_space(["a b", "b c", "c d"], "statistical", r=2)
    path = tmp_path / "m.json"
    save_model(path, space)
    text = path.read_text()
    (tmp_path / "v.json").write_text(text.replace('"version": 1', '"version": 99'))
    with pytest.raises(ModelFileError, match="header"):
        load_model(tmp_path / "v.json")
    (tmp_path / "t.json").write_text(text[: len(text) // 2])
    with pytest.raises(ModelFileError, match="header"):
        load_model(tmp_path / "t.json")
    import json
    doc = json.loads(text)
    doc["space"]["U"]["shape"] = [99, 99]
    (tmp_path / "u.json").write_text(json.dumps(doc))
    with pytest.raises(ModelFileError, match="space"):
        load_model(tmp_path / "u.json")


def test_document_objects_accepted():
    docs = [Document("1", "a b", 0), Document("2", "b c", 1)]
    space, V = induce_space(docs, "statistical", r=2)
    np.testing.assert_allclose(space.fold_in(docs)[0], V, atol=1e-12)
