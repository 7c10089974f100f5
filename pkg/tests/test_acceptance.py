"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL``/``REPORT``/``SKIP`` line that is
printed in the terminal summary. Dataset-conditional checks run only when
the corpora are supplied through environment variables:

    SARCLAB_SARCASMCORPUS   JSONL/CSV with star ratings
    SARCLAB_SEMEVAL_TRAIN   SemEval-2018 Task 3A training split
    SARCLAB_SEMEVAL_TEST    SemEval-2018 Task 3A gold test split
"""

import os
import time
import warnings

import numpy as np
import pytest

from sarclab.classifiers import SVC, GradientBoostingClassifier, LogisticRegression
from sarclab.classifiers.logistic import gradient, objective, smooth_gradient, smooth_loss
from sarclab.classifiers.svm import kkt_violations
from sarclab.cli import main
from sarclab.corpus import load_corpus
from sarclab.evaluation import ExperimentConfig, run_in_corpus, run_inter_corpora, select_best
from sarclab.exceptions import RankClampWarning
from sarclab.linalg import frobenius_distance, hellinger_distance, svd, truncate
from sarclab.lsa import induce_space, probability_amplitude, probability_distribution
from sarclab.synthetic import separable_corpus, shuffled_labels

from conftest import ACCEPTANCE_LINES, blobs, corpus_records, write_jsonl

ALL_CLASSIFIERS = ("svm", "logistic", "random_forest", "gradient_boosting")


def verdict(name, ok, detail, status=None):
    status = status or ("PASS" if ok else "FAIL")
    ACCEPTANCE_LINES.append(f"{status:6s} {name}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, f"{name}: {detail}"


# -- always-runnable property suite ---------------------------------------

def test_eckart_young_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(20)
    worst_rel, losses = 0.0, 0
    for _ in range(50):
        a = rng.normal(size=(20, 30))
        f = svd(a)
        for r in range(1, f.k + 1):
            t = truncate(f, r)
            got = frobenius_distance(a, t.reconstruct())
            expected = np.sqrt(np.sum(f.sigma[r:] ** 2))
            rel = abs(got - expected) / expected if expected > 0 else got / np.linalg.norm(a)
            worst_rel = max(worst_rel, rel)
            # half unstructured competitors, half rank-r perturbations of the optimum
            G, H = rng.normal(size=(50, 20, r)), rng.normal(size=(50, r, 30))
            eps = 10.0 ** rng.uniform(-6, 0, size=(50, 1, 1))
            Up = t.U + eps * rng.normal(size=(50, 20, r))
            Vp = t.V + eps * rng.normal(size=(50, 30, r))
            competitors = np.concatenate([G @ H, (Up * t.sigma) @ Vp.transpose(0, 2, 1)])
            residuals = np.linalg.norm(a - competitors, axis=(1, 2))
            losses += int(np.sum(residuals < got))
    elapsed = time.perf_counter() - start
    ok = worst_rel <= 1e-6 and losses == 0 and elapsed < 10
    verdict("Eckart-Young suite", ok, f"max rel residual error {worst_rel:.1e}, "
            f"{losses} competitor wins of 100000, {elapsed:.2f}s")


def test_estimator_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(21)
    amp_dev = max(abs(np.sum(probability_amplitude(rng.normal(size=(10, 8))) ** 2) - 1) for _ in range(200))
    dist_dev, violated, violations = 0.0, 0, {}
    for _ in range(20):
        A = rng.integers(0, 5, size=(10, 8)).astype(float)
        Q = A / A.sum()
        psi = np.sqrt(Q)
        f = svd(psi)
        bad = False
        for r in range(1, f.k + 1):
            xi = truncate(f, r).reconstruct()
            p = probability_distribution(probability_amplitude(xi))
            dist_dev = max(dist_dev, abs(p.sum() - 1))
            if hellinger_distance(p, Q) > frobenius_distance(xi, psi):
                violations[r] = violations.get(r, 0) + 1
                bad = True
        violated += bad
    elapsed = time.perf_counter() - start
    ok = amp_dev <= 1e-12 and dist_dev <= 1e-10 and violated == 0 and elapsed < 5
    by_rank = ", ".join(f"r={r}:{n}" for r, n in sorted(violations.items()))
    verdict("Estimator suite", ok, f"sum psi^2 dev {amp_dev:.1e}, sum p_d(p_a) dev {dist_dev:.1e}, "
            f"Hellinger>Frobenius on {violated}/20 instances ({by_rank or 'none'}), {elapsed:.2f}s")


def test_fold_in_exactness():
    start = time.perf_counter()
    corpus = separable_corpus(30, vocab_size=25, seed=22)
    errors = {}
    for variant in ("traditional", "statistical"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankClampWarning)
            space, V = induce_space(corpus.texts, variant, r=10_000)
        vectors, _ = space.fold_in(corpus.texts)
        errors[variant] = float(np.max(np.abs(vectors - V)))
    elapsed = time.perf_counter() - start
    ok = max(errors.values()) <= 1e-8 and elapsed < 5
    verdict("Fold-in exactness", ok, f"max |d_r - V_r| traditional {errors['traditional']:.1e}, "
            f"statistical {errors['statistical']:.1e}, {elapsed:.2f}s")


def _fd_rel_error(fun, grad, beta, h=1e-6):
    numeric = np.array([(fun(beta + h * e) - fun(beta - h * e)) / (2 * h) for e in np.eye(len(beta))])
    return np.linalg.norm(grad(beta) - numeric) / max(np.linalg.norm(numeric), 1e-12)


def test_solver_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(23)
    X = rng.normal(size=(60, 6))
    y = rng.integers(0, 2, 60)
    w = rng.uniform(0.5, 2.0, 60)
    fd = 0.0
    for _ in range(20):
        beta = rng.normal(size=7)
        fd = max(fd,
                 _fd_rel_error(lambda b: objective(b, X, y, w, 10.0, "l2"),
                               lambda b: gradient(b, X, y, w, 10.0, "l2"), beta),
                 _fd_rel_error(lambda b: smooth_loss(b, X, y, w, 10.0),
                               lambda b: smooth_gradient(b, X, y, w, 10.0), beta))

    Xb, yb = blobs(200, margin=1.0, seed=24)
    svm = SVC(C=100, gamma=0.5).fit(Xb, yb)
    kkt = float(np.max(kkt_violations(svm, Xb, yb)))

    Xx = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    yx = np.array([0, 0, 1, 1])
    xor_acc = SVC(C=100, gamma=1.0).fit(Xx, yx).score(Xx, yx)

    Xg, yg = blobs(300, margin=0.0, seed=25)
    loss = np.array(GradientBoostingClassifier(n_estimators=100, random_state=0).fit(Xg, yg).train_loss_)
    rises = int(np.sum(np.diff(loss) > 0))

    lr = LogisticRegression(penalty="l1", C=10.0).fit(Xb, yb)
    hist = np.array(lr.objective_history_)
    lr_rises = int(np.sum(np.diff(hist) > 1e-12 * np.abs(hist[:-1])))

    elapsed = time.perf_counter() - start
    ok = fd <= 1e-5 and kkt <= 1e-3 and xor_acc == 1.0 and rises == 0 and lr_rises == 0 and elapsed < 60
    verdict("Solver suite", ok, f"FD gradient rel err {fd:.1e}, SVM max KKT violation {kkt:.1e}, "
            f"XOR accuracy {xor_acc:.2f}, boosting loss rises {rises}/100, "
            f"logistic objective rises {lr_rises}, {elapsed:.2f}s")


def test_pipeline_null_check():
    start = time.perf_counter()
    config = ExperimentConfig(rank_grid=(10,), k_folds=10, seed=42)
    separable = separable_corpus(200, seed=26)
    shuffled = shuffled_labels(separable_corpus(200, seed=27), seed=28)
    details, ok = [], True
    for variant in ("statistical", "traditional"):
        cfg = ExperimentConfig(variant=variant, rank_grid=(10,), k_folds=10, seed=config.seed)
        sep = {r.config.classifier: r.mean.f1 for r in run_in_corpus(separable, cfg, ALL_CLASSIFIERS)}
        null = {r.config.classifier: r.mean.accuracy for r in run_in_corpus(shuffled, cfg, ALL_CLASSIFIERS)}
        ok &= min(sep.values()) >= 0.95 and all(0.40 <= a <= 0.60 for a in null.values())
        details.append(f"{variant[0].upper()}: min separable F1 {min(sep.values()):.3f}, "
                       f"shuffled accuracy {min(null.values()):.3f}-{max(null.values()):.3f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    verdict("Pipeline null check", ok, "; ".join(details) + f", {elapsed:.1f}s")


def test_determinism(tmp_path):
    corpora = {n: write_jsonl(tmp_path / f"{n}.jsonl", corpus_records(separable_corpus(60, seed=i, name=n,
                                                                                       shared_rate=0.6)))
               for i, n in enumerate(("a", "b"))}
    listing = "\n".join(f"{n} = {p}" for n, p in corpora.items())
    outputs = []
    for regime in ("in_corpus", "union", "inter_corpora"):
        manifest = tmp_path / f"{regime}.ini"
        manifest.write_text(f"[evaluate]\nregime = {regime}\nvariant = statistical, traditional\n"
                            f"classifier = all\nrank_grid = 2, 5\nk_folds = 3\nseed = 9\n"
                            f"output_dir = out_{regime}\n\n[random_forest]\nn_estimators = 10\n\n"
                            f"[gradient_boosting]\nn_estimators = 10\n\n[corpora]\n{listing}\n")
        runs = []
        for jobs in ("1", "2"):
            assert main(["--jobs", jobs, "evaluate", str(manifest)]) == 0
            runs.append((tmp_path / f"out_{regime}" / "results.csv").read_bytes())
        outputs.append(runs[0] == runs[1])
    verdict("Determinism", all(outputs), f"byte-identical CSV on rerun for in_corpus/union/inter_corpora: {outputs}")


# -- dataset-conditional reproduction -------------------------------------

def _env_path(name):
    value = os.environ.get(name)
    if not value:
        ACCEPTANCE_LINES.append(f"SKIP   {name} not set; dataset-conditional check not run")
        pytest.skip(f"{name} not set")
    return value


def test_sarcasmcorpus_reproduction():
    corpus = load_corpus(_env_path("SARCLAB_SARCASMCORPUS"), name="SarcasmCorpus")
    start = time.perf_counter()
    grid = (10, 20, 40, 60, 80, 100, 150, 200)
    base = dict(classifier="logistic", rank_grid=grid, k_folds=10, seed=42, n_jobs=os.cpu_count() or 1)
    plain = select_best(run_in_corpus(corpus, ExperimentConfig(variant="statistical", **base))).mean.f1 * 100
    star = select_best(run_in_corpus(corpus, ExperimentConfig(variant="traditional", use_star=True,
                                                                **base))).mean.f1 * 100
    elapsed = time.perf_counter() - start
    within = abs(plain - 71.8) <= 3.0 and abs(star - 80.7) <= 3.0
    detail = (f"S-LogReg.L1 F1 {plain:.1f} (target 71.8), T-LogReg.L1 + star F1 {star:.1f} (target 80.7), "
              f"{elapsed / 60:.1f} min")
    # deviation is reported, not failed; only the runtime bound is enforced
    verdict("SarcasmCorpus reproduction", elapsed < 1800, detail, status=None if within else "REPORT")


def test_semeval_reproduction():
    train = load_corpus(_env_path("SARCLAB_SEMEVAL_TRAIN"), name="semeval-train")
    test = load_corpus(_env_path("SARCLAB_SEMEVAL_TEST"), name="semeval-test")
    config = ExperimentConfig(variant="statistical", classifier="random_forest", rank_grid=(20,), seed=42)
    f1 = run_inter_corpora(train, test, config, rank=20, regime="holdout").mean.f1 * 100
    verdict("SemEval-2018 3A reproduction", abs(f1 - 63.2) <= 3.0, f"S-RF test F1 {f1:.1f} at rank 20 (target 63.2)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
