"""Translation metrics, experiment protocols, and report emission.

Five metrics: fp_acc (impulse-profile MSE), fd_acc (total-impulse cosine),
mod_sim / dir_sim (embedding cosine of predicted vs true words), and
phrase_sim (their average).  Three protocols: repeated random splits,
modifier holdout, direction holdout.  Reports serialize to a long-format
CSV of aggregates or a structured JSON document with per-round detail.
"""
from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import DIRECTIONS, MODIFIERS, expand_direction
from .errors import InputError
from .lang import cosine_similarity
from .models import TrainConfig, train
from .data import split_holdout_token, split_random
from .signal import integrate_impulse, resample

METRICS = ("fp_acc", "fd_acc", "mod_sim", "dir_sim", "phrase_sim")

CSV_HEADER = ("protocol", "variant", "metric", "mean", "sd", "rounds")

SMALL_SAMPLE_N = 5


def fp_acc(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared error over every entry of two equally shaped profile
    matrices.  The protocols feed it cumulative impulse profiles in
    Newton-seconds, so reported values are in N^2 s^2."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise InputError(f"shape mismatch {pred.shape} vs {truth.shape}")
    diff = pred - truth
    return float(np.mean(diff * diff))


def fd_acc_degenerate(pred_j: np.ndarray, truth_j: np.ndarray) -> bool:
    """True when either total impulse is the zero vector, where the
    directional cosine is undefined."""
    return (float(np.linalg.norm(pred_j)) == 0.0
            or float(np.linalg.norm(truth_j)) == 0.0)


def fd_acc(pred_j: np.ndarray, truth_j: np.ndarray) -> float:
    """Cosine similarity of two total-impulse vectors; scores the
    degenerate zero-vector case as 0 so aggregates stay finite."""
    pred_j = np.asarray(pred_j, dtype=float)
    truth_j = np.asarray(truth_j, dtype=float)
    if pred_j.shape != truth_j.shape:
        raise InputError(f"shape mismatch {pred_j.shape} vs {truth_j.shape}")
    if fd_acc_degenerate(pred_j, truth_j):
        return 0.0
    return cosine_similarity(pred_j, truth_j)


def word_sim(a: str, b: str, provider) -> float:
    """Cosine of the provider embeddings of two texts."""
    return cosine_similarity(provider.embed(a), provider.embed(b))


def phrase_sim(mod_sim: float, dir_sim: float) -> float:
    return (mod_sim + dir_sim) / 2.0


def _slot_sim(pred_token, truth_token, provider, expand: bool) -> float:
    # empty-slot rule: agreement on empty is perfect, a one-sided empty
    # is a full miss
    if pred_token is None and truth_token is None:
        return 1.0
    if pred_token is None or truth_token is None:
        return 0.0
    if expand:
        return word_sim(expand_direction(pred_token), expand_direction(truth_token), provider)
    return word_sim(pred_token, truth_token, provider)


def score_samples(model, samples: list, provider) -> tuple[dict, int]:
    """Run both translation directions over a sample list.

    Returns (per-sample metric lists keyed like METRICS, count of
    degenerate zero-impulse cosine cases)."""
    values: dict[str, list[float]] = {m: [] for m in METRICS}
    degenerate = 0
    for s in samples:
        pred_phrase = model.force_to_phrase(s.profile)
        m = _slot_sim(pred_phrase.modifier, s.phrase.modifier, provider, expand=False)
        d = _slot_sim(pred_phrase.direction, s.phrase.direction, provider, expand=True)
        values["mod_sim"].append(float(m))
        values["dir_sim"].append(float(d))
        values["phrase_sim"].append(float(phrase_sim(m, d)))

        # force-side fidelity is scored on the cumulative impulse profile
        # (the models' native force representation, in Newton-seconds);
        # integrating the returned force curve recovers it exactly
        truth_impulse = integrate_impulse(resample(s.profile))
        pred_forces = model.phrase_to_force(s.phrase)
        pred_impulse = integrate_impulse(pred_forces)
        values["fp_acc"].append(fp_acc(pred_impulse.axes(), truth_impulse.axes()))
        pred_j = pred_impulse.final_impulse()
        truth_j = truth_impulse.final_impulse()
        if fd_acc_degenerate(pred_j, truth_j):
            degenerate += 1
        values["fd_acc"].append(fd_acc(pred_j, truth_j))
    return values, degenerate


@dataclass
class RoundReport:
    """One split's scores for one variant."""

    label: str
    variant: str
    n_test: int
    samples: dict  # metric -> per-sample list
    means: dict  # metric -> mean over the round's test samples
    degenerate_fd: int
    small_sample: bool


@dataclass
class VariantReport:
    variant: str
    rounds: list
    mean: dict = field(default_factory=dict)  # metric -> mean of round means
    sd: dict = field(default_factory=dict)  # metric -> sd (ddof=1) of round means

    def __post_init__(self):
        if not self.rounds:
            raise InputError("variant report needs at least one round")
        for metric in METRICS:
            per_round = [r.means[metric] for r in self.rounds]
            self.mean[metric] = float(np.mean(per_round))
            self.sd[metric] = float(np.std(per_round, ddof=1)) if len(per_round) > 1 else 0.0

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)


@dataclass
class EvalReport:
    protocol: str  # in_dist | ood_mod | ood_dir
    seed: int
    variants: list  # VariantReport, requested order

    def variant(self, name: str) -> VariantReport:
        for v in self.variants:
            if v.variant == name:
                return v
        raise KeyError(name)


def _assert_partition(corpus, train_side, test_side):
    corpus_ids = [s.id for s in corpus]
    train_ids = {s.id for s in train_side}
    test_ids = {s.id for s in test_side}
    if train_ids & test_ids:
        raise AssertionError(f"split leak: {sorted(train_ids & test_ids)[:3]} in both sides")
    if train_ids | test_ids != set(corpus_ids):
        raise AssertionError("split sides do not partition the corpus")


def _assert_clean_holdout(train_side, slot, token):
    bad = [s.id for s in train_side if getattr(s.phrase, slot) == token]
    if bad:
        raise AssertionError(f"held-out {slot} {token!r} leaked into training: {bad[:3]}")


@dataclass(frozen=True)
class _RoundSpec:
    label: str
    kind: str  # random | modifier | direction
    token: str | None
    seed: int
    test_fraction: float


def _run_round(payload):
    samples, variants, provider, config, spec = payload
    if spec.kind == "random":
        train_side, test_side = split_random(samples, spec.test_fraction, seed=spec.seed)
    else:
        train_side, test_side = split_holdout_token(samples, spec.token, slot=spec.kind)
    _assert_partition(samples, train_side, test_side)
    if spec.kind != "random":
        _assert_clean_holdout(train_side, spec.kind, spec.token)
    reports = []
    for variant in variants:
        model = train(variant, train_side, config=config, seed=spec.seed, provider=provider)
        values, degenerate = score_samples(model, test_side, provider)
        means = {m: float(np.mean(values[m])) for m in METRICS}
        reports.append(RoundReport(
            label=spec.label, variant=variant, n_test=len(test_side),
            samples=values, means=means, degenerate_fd=degenerate,
            small_sample=len(test_side) < SMALL_SAMPLE_N))
    return reports


def _run_rounds(payloads, jobs):
    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(payloads))) as pool:
            per_round = list(pool.map(_run_round, payloads))
    else:
        per_round = [_run_round(p) for p in payloads]
    return per_round


def _collect(protocol, seed, variants, per_round):
    by_variant = {v: [] for v in variants}
    for round_reports in per_round:
        for r in round_reports:
            by_variant[r.variant].append(r)
    return EvalReport(protocol=protocol, seed=seed,
                      variants=[VariantReport(v, by_variant[v]) for v in variants])


def _check_common(samples, variants, provider):
    if provider is None:
        raise InputError("an embedding provider is required for word similarity scoring")
    if not variants:
        raise InputError("no variants requested")
    if len(set(variants)) != len(variants):
        raise InputError("duplicate variant in request")
    if not samples:
        raise InputError("corpus is empty")


def run_in_distribution(samples: list, variants, provider, trials: int = 30,
                        test_fraction: float = 0.1, seed: int = 0,
                        config: TrainConfig = TrainConfig(), jobs: int = 1) -> EvalReport:
    """Repeated random-split protocol: per trial, hold out test_fraction,
    train every variant on the rest, score both directions on the test
    side.  Aggregates are mean and sd of the per-trial means."""
    _check_common(samples, variants, provider)
    if len(samples) < 20:
        raise InputError(f"need at least 20 samples, got {len(samples)}")
    if trials < 1:
        raise InputError("trials must be positive")
    specs = [_RoundSpec(label=f"trial-{i:02d}", kind="random", token=None,
                        seed=seed + i, test_fraction=test_fraction)
             for i in range(trials)]
    payloads = [(samples, list(variants), provider, config, s) for s in specs]
    return _collect("in_dist", seed, list(variants), _run_rounds(payloads, jobs))


def _run_holdout(protocol, slot, tokens, samples, variants, provider, seed, config, jobs):
    _check_common(samples, variants, provider)
    present = []
    for token in tokens:
        if any(getattr(s.phrase, slot) == token for s in samples):
            present.append(token)
        else:
            warnings.warn(f"{slot} {token!r} absent from corpus; round skipped")
    if not present:
        raise InputError(f"no {slot} tokens from the vocabulary occur in the corpus")
    specs = [_RoundSpec(label=token, kind=slot, token=token, seed=seed + i,
                        test_fraction=0.0)
             for i, token in enumerate(present)]
    payloads = [(samples, list(variants), provider, config, s) for s in specs]
    return _collect(protocol, seed, list(variants), _run_rounds(payloads, jobs))


def run_ood_modifiers(samples: list, variants, provider, seed: int = 0,
                      config: TrainConfig = TrainConfig(), jobs: int = 1) -> EvalReport:
    """Leave-one-modifier-out: one round per vocabulary modifier present in
    the corpus, training on everything else and testing on the held-out
    samples.  Aggregates average the per-modifier rounds."""
    return _run_holdout("ood_mod", "modifier", MODIFIERS, samples, variants,
                        provider, seed, config, jobs)


def run_ood_directions(samples: list, variants, provider, seed: int = 0,
                       config: TrainConfig = TrainConfig(), jobs: int = 1) -> EvalReport:
    """Leave-one-direction-out over all 18 direction tokens."""
    return _run_holdout("ood_dir", "direction", DIRECTIONS, samples, variants,
                        provider, seed, config, jobs)


def _round_payload(r: RoundReport) -> dict:
    return {
        "label": r.label,
        "n_test": r.n_test,
        "means": {m: float(r.means[m]) for m in METRICS},
        "samples": {m: [float(v) for v in r.samples[m]] for m in METRICS},
        "degenerate_fd": int(r.degenerate_fd),
        "small_sample": bool(r.small_sample),
    }


def report_payload(report: EvalReport) -> dict:
    """The structured-report document as a plain dict."""
    return {
        "protocol": report.protocol,
        "seed": report.seed,
        "metrics": list(METRICS),
        "variants": [
            {
                "variant": v.variant,
                "n_rounds": v.n_rounds,
                "mean": {m: float(v.mean[m]) for m in METRICS},
                "sd": {m: float(v.sd[m]) for m in METRICS},
                "rounds": [_round_payload(r) for r in v.rounds],
            }
            for v in report.variants
        ],
    }


def emit_report(report: EvalReport, path, format: str = "csv") -> None:
    """Write a report.  format="csv": long-format aggregate table, header
    protocol,variant,metric,mean,sd,rounds, one row per variant-metric,
    floats in repr form so parsing recovers them exactly.  format=
    "structured": JSON document with per-round and per-sample detail.
    Equal reports serialize byte-identically."""
    if format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for v in report.variants:
                for metric in METRICS:
                    writer.writerow([report.protocol, v.variant, metric,
                                     repr(float(v.mean[metric])),
                                     repr(float(v.sd[metric])),
                                     v.n_rounds])
    elif format == "structured":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report_payload(report), fh, sort_keys=True, indent=1)
            fh.write("\n")
    else:
        raise InputError(f"unknown report format {format!r}")
