import csv
import json
import warnings

import numpy as np
import pytest

from forcelang.core import GRID_N, MODIFIERS, Phrase
from forcelang.data import PairedSample
from forcelang.errors import InputError
from forcelang.evaluate import (
    CSV_HEADER,
    METRICS,
    EvalReport,
    RoundReport,
    VariantReport,
    _assert_clean_holdout,
    _assert_partition,
    emit_report,
    fd_acc,
    fd_acc_degenerate,
    fp_acc,
    phrase_sim,
    report_payload,
    run_in_distribution,
    run_ood_directions,
    run_ood_modifiers,
    score_samples,
    word_sim,
)
from forcelang.models import TrainConfig
from forcelang.signal import integrate_impulse, resample


def naive_mse(pred, truth):
    total = 0.0
    count = 0
    for i in range(pred.shape[0]):
        for j in range(pred.shape[1]):
            total += (pred[i, j] - truth[i, j]) ** 2
            count += 1
    return total / count


def test_fp_acc_examples_and_oracle():
    truth = np.random.default_rng(0).standard_normal((3, GRID_N))
    assert fp_acc(truth, truth) == 0.0
    assert fp_acc(truth + 1.0, truth) == pytest.approx(1.0, abs=1e-12)
    pred = np.random.default_rng(1).standard_normal((3, GRID_N))
    assert fp_acc(pred, truth) == pytest.approx(naive_mse(pred, truth), abs=1e-12)
    assert fp_acc(pred, truth) >= 0.0
    with pytest.raises(InputError):
        fp_acc(np.zeros((3, 10)), np.zeros((3, 11)))


def test_fd_acc_examples():
    assert fd_acc(np.array([2.0, 0, 0]), np.array([1.0, 0, 0])) == pytest.approx(1.0)
    assert fd_acc(np.array([1.0, 0, 0]), np.array([-1.0, 0, 0])) == pytest.approx(-1.0)
    assert fd_acc(np.array([1.0, 0, 0]), np.array([0.0, 1, 0])) == pytest.approx(0.0)


def test_fd_acc_scale_invariance():
    rng = np.random.default_rng(2)
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    for alpha in (0.5, 3.0, 1e6):
        assert abs(fd_acc(alpha * a, b) - fd_acc(a, b)) < 1e-12


def test_fd_acc_degenerate_zero():
    zero = np.zeros(3)
    one = np.array([1.0, 0, 0])
    assert fd_acc_degenerate(zero, one)
    assert fd_acc_degenerate(one, zero)
    assert not fd_acc_degenerate(one, one)
    assert fd_acc(zero, one) == 0.0
    assert fd_acc(one, zero) == 0.0


def test_word_sim(provider):
    assert word_sim("quickly", "quickly", provider) == pytest.approx(1.0)
    assert word_sim("quickly", "slowly", provider) == pytest.approx(
        word_sim("slowly", "quickly", provider))
    assert abs(word_sim("quickly", "slowly", provider)) < 0.3


def test_phrase_sim_examples():
    assert phrase_sim(1.0, 1.0) == 1.0
    assert phrase_sim(1.0, 0.0) == 0.5
    assert phrase_sim(-1.0, 1.0) == 0.0


class FixedModel:
    """Stub translation model with canned outputs, for metric-path tests."""

    def __init__(self, phrase, forces):
        self.phrase = phrase
        self.forces = forces

    def force_to_phrase(self, profile):
        return self.phrase

    def phrase_to_force(self, phrase):
        return self.forces


def test_score_samples_empty_slot_rules(small_corpus, provider):
    sample = PairedSample(id="x", participant=1, phrase=Phrase(None, "up"),
                          profile=small_corpus[0].profile,
                          provenance="phrase-to-force")
    model = FixedModel(Phrase(None, None), np.zeros((3, GRID_N)))
    values, degenerate = score_samples(model, [sample], provider)
    # empty vs empty modifier scores 1, empty vs "up" direction scores 0
    assert values["mod_sim"] == [1.0]
    assert values["dir_sim"] == [0.0]
    assert values["phrase_sim"] == [0.5]
    # zero predicted forces give a zero impulse: degenerate cosine
    assert degenerate == 1
    assert values["fd_acc"] == [0.0]


def test_score_samples_impulse_space(svm_model, small_corpus, provider):
    subset = small_corpus[:5]
    values, _ = score_samples(svm_model, subset, provider)
    for m in METRICS:
        assert len(values[m]) == len(subset)
    s = subset[0]
    truth = integrate_impulse(resample(s.profile))
    pred = integrate_impulse(svm_model.phrase_to_force(s.phrase))
    expected = fp_acc(pred.axes(), truth.axes())
    assert values["fp_acc"][0] == pytest.approx(expected, rel=1e-12)
    assert all(v >= 0.0 for v in values["fp_acc"])
    assert all(-1.0 <= v <= 1.0 for v in values["fd_acc"])
    assert all(-1.0 <= v <= 1.0 for v in values["phrase_sim"])


def make_round(label, means, n_test=10):
    return RoundReport(label=label, variant="svm_knn", n_test=n_test,
                       samples={m: [means[m]] for m in METRICS},
                       means=dict(means), degenerate_fd=0,
                       small_sample=n_test < 5)


def test_variant_report_aggregates():
    base = {m: 0.0 for m in METRICS}
    rounds = [make_round("a", dict(base, fp_acc=1.0)),
              make_round("b", dict(base, fp_acc=3.0))]
    rep = VariantReport("svm_knn", rounds)
    assert rep.n_rounds == 2
    assert rep.mean["fp_acc"] == pytest.approx(2.0)
    assert rep.sd["fp_acc"] == pytest.approx(np.std([1.0, 3.0], ddof=1))
    single = VariantReport("svm_knn", [make_round("a", base)])
    assert single.sd["fp_acc"] == 0.0
    with pytest.raises(InputError):
        VariantReport("svm_knn", [])


def test_eval_report_lookup():
    base = {m: 0.0 for m in METRICS}
    rep = EvalReport(protocol="in_dist", seed=0,
                     variants=[VariantReport("svm_knn", [make_round("a", base)])])
    assert rep.variant("svm_knn").variant == "svm_knn"
    with pytest.raises(KeyError):
        rep.variant("dae_b")


def test_partition_assertions(small_corpus):
    train, test = small_corpus[:30], small_corpus[30:]
    _assert_partition(small_corpus, train, test)
    with pytest.raises(AssertionError, match="leak"):
        _assert_partition(small_corpus, train, small_corpus[29:])
    with pytest.raises(AssertionError, match="partition"):
        _assert_partition(small_corpus, train, small_corpus[31:])


def test_clean_holdout_assertion(small_corpus):
    token = next(s.phrase.direction for s in small_corpus if s.phrase.direction)
    clean = [s for s in small_corpus if s.phrase.direction != token]
    _assert_clean_holdout(clean, "direction", token)
    with pytest.raises(AssertionError, match="leaked"):
        _assert_clean_holdout(small_corpus, "direction", token)


def fast_eval_config():
    return TrainConfig(epochs=1, batch_size=16, svm_epochs=20)


def test_run_in_distribution_svm(small_corpus, provider):
    report = run_in_distribution(small_corpus, ["svm_knn"], provider, trials=2,
                                 seed=5, config=fast_eval_config())
    assert report.protocol == "in_dist"
    assert report.seed == 5
    v = report.variant("svm_knn")
    assert v.n_rounds == 2
    assert [r.label for r in v.rounds] == ["trial-00", "trial-01"]
    assert all(r.n_test == 4 for r in v.rounds)  # 10% of 40
    for m in METRICS:
        assert np.isfinite(v.mean[m])
        assert v.sd[m] >= 0.0


def test_run_in_distribution_validation(small_corpus, provider):
    with pytest.raises(InputError):
        run_in_distribution(small_corpus, ["svm_knn"], None, trials=1)
    with pytest.raises(InputError):
        run_in_distribution(small_corpus, [], provider, trials=1)
    with pytest.raises(InputError):
        run_in_distribution(small_corpus, ["svm_knn", "svm_knn"], provider, trials=1)
    with pytest.raises(InputError):
        run_in_distribution([], ["svm_knn"], provider, trials=1)
    with pytest.raises(InputError):
        run_in_distribution(small_corpus[:10], ["svm_knn"], provider, trials=1)
    with pytest.raises(InputError):
        run_in_distribution(small_corpus, ["svm_knn"], provider, trials=0)


def test_run_in_distribution_deterministic(small_corpus, provider, tmp_path):
    kwargs = dict(trials=2, seed=7, config=fast_eval_config())
    a = run_in_distribution(small_corpus, ["svm_knn"], provider, **kwargs)
    b = run_in_distribution(small_corpus, ["svm_knn"], provider, **kwargs)
    assert report_payload(a) == report_payload(b)


def test_run_in_distribution_jobs_parallel_matches_serial(small_corpus, provider):
    kwargs = dict(trials=2, seed=3, config=fast_eval_config())
    serial = run_in_distribution(small_corpus, ["svm_knn"], provider, jobs=1, **kwargs)
    parallel = run_in_distribution(small_corpus, ["svm_knn"], provider, jobs=2, **kwargs)
    assert report_payload(serial) == report_payload(parallel)


def test_run_ood_modifiers_rounds(small_corpus, provider):
    present = {s.phrase.modifier for s in small_corpus} - {None}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = run_ood_modifiers(small_corpus, ["svm_knn"], provider, seed=0,
                                   config=fast_eval_config())
    v = report.variant("svm_knn")
    assert report.protocol == "ood_mod"
    assert v.n_rounds == len(present)
    assert {r.label for r in v.rounds} == present
    skipped = set(MODIFIERS) - present
    for token in skipped:
        assert any(repr(token) in str(w.message) for w in caught)
    for r in v.rounds:
        assert r.n_test > 0


def test_run_ood_directions_small_sample_flag(small_corpus, provider):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = run_ood_directions(small_corpus, ["svm_knn"], provider, seed=0,
                                    config=fast_eval_config())
    v = report.variant("svm_knn")
    assert report.protocol == "ood_dir"
    for r in v.rounds:
        assert r.small_sample == (r.n_test < 5)
    assert any(r.small_sample for r in v.rounds)


def test_emit_report_csv(small_corpus, provider, tmp_path):
    report = run_in_distribution(small_corpus, ["svm_knn"], provider, trials=2,
                                 seed=1, config=fast_eval_config())
    path = tmp_path / "report.csv"
    emit_report(report, path, format="csv")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(CSV_HEADER)
    assert len(rows) == 1 + len(METRICS)
    v = report.variant("svm_knn")
    for row in rows[1:]:
        protocol, variant, metric, mean, sd, rounds = row
        assert protocol == "in_dist"
        assert variant == "svm_knn"
        # repr floats parse back to the exact aggregate values
        assert float(mean) == v.mean[metric]
        assert float(sd) == v.sd[metric]
        assert int(rounds) == 2


def test_emit_report_structured_and_determinism(small_corpus, provider, tmp_path):
    report = run_in_distribution(small_corpus, ["svm_knn"], provider, trials=2,
                                 seed=1, config=fast_eval_config())
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    emit_report(report, a, format="structured")
    emit_report(report, b, format="structured")
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["protocol"] == "in_dist"
    assert doc["metrics"] == list(METRICS)
    assert doc["variants"][0]["n_rounds"] == 2
    assert len(doc["variants"][0]["rounds"][0]["samples"]["fp_acc"]) == 4

    c1 = tmp_path / "c1.csv"
    c2 = tmp_path / "c2.csv"
    emit_report(report, c1, format="csv")
    emit_report(report, c2, format="csv")
    assert c1.read_bytes() == c2.read_bytes()

    with pytest.raises(InputError):
        emit_report(report, tmp_path / "x.bin", format="binary")
