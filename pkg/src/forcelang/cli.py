"""Command-line frontend: forcelang {gen-data,train,translate,eval,vocab,split}.

Exit codes: 0 success, 1 runtime failure, 2 usage error.  Every
subcommand is deterministic given its flags; generation and evaluation
write manifests/reports that carry their seeds.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .core import (
    DIRECTIONS,
    GRID_N,
    HORIZON_S,
    MODIFIERS,
    VOCAB_VERSION,
    all_phrases,
    phrase_to_text,
)
from .data import (
    GeneratorConfig,
    corpus_manifest,
    generate_corpus,
    read_dataset,
    split_holdout_token,
    split_random,
    write_dataset,
)
from .errors import ForcelangError, InputError
from .evaluate import (
    METRICS,
    emit_report,
    run_in_distribution,
    run_ood_directions,
    run_ood_modifiers,
)
from .lang import DEFAULT_SIGMA, HashingProvider, table_provider
from .models import (
    TrainConfig,
    VARIANTS,
    load_checkpoint,
    save_checkpoint,
    train,
    translate_text,
)

TABLE_ENV = "FORCELANG_EMBED_TABLE"


class _Usage(Exception):
    """Bad flag values or combinations; reported with exit code 2."""


def _table_path(args) -> str | None:
    return args.table or os.environ.get(TABLE_ENV) or None


def _resolve_provider(args):
    """Provider from flags: explicit --provider wins, otherwise a table
    path (flag or environment) selects the table provider, otherwise the
    seeded hashing provider."""
    path = _table_path(args)
    kind = args.provider
    if kind is None:
        kind = "table" if path else "hashing"
    if kind == "table":
        if not path:
            raise _Usage(f"--provider table needs --table or {TABLE_ENV}")
        return table_provider(path)
    return HashingProvider(args.embed_seed)


def _add_provider_flags(sub):
    sub.add_argument("--provider", choices=("table", "hashing"), default=None,
                     help="embedding source (default: table when a table path "
                          "is set, else hashing)")
    sub.add_argument("--table", default=None,
                     help=f"embedding table path (or set {TABLE_ENV})")
    sub.add_argument("--embed-seed", type=int, default=0,
                     help="seed for the hashing provider")


def cmd_gen_data(args) -> int:
    try:
        cfg = GeneratorConfig(
            participants=args.participants,
            phrase_trials=args.phrase_trials,
            description_trials=args.description_trials,
            noise=args.noise,
            seed=args.seed,
        )
    except InputError as e:
        raise _Usage(str(e)) from None
    samples = generate_corpus(cfg)
    write_dataset(samples, args.out)
    manifest_path = args.manifest or args.out + ".manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(corpus_manifest(cfg, samples), fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"wrote {len(samples)} samples to {args.out} (manifest: {manifest_path})")
    return 0


def _write_loss_history(history, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        keys = list(history[0])
        fh.write(",".join(["epoch"] + keys) + "\n")
        for i, row in enumerate(history, start=1):
            fh.write(",".join([str(i)] + [repr(float(row[k])) for k in keys]) + "\n")


def cmd_train(args) -> int:
    try:
        config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                             learning_rate=args.learning_rate)
    except InputError as e:
        raise _Usage(str(e)) from None
    samples = read_dataset(args.corpus)
    provider = None
    if args.variant in ("dae_s", "dmlp_s"):
        provider = _resolve_provider(args)
    model = train(args.variant, samples, config=config, seed=args.seed,
                  provider=provider)
    save_checkpoint(model, args.out)
    history_path = args.history or args.out + ".loss.csv"
    _write_loss_history(model.loss_history, history_path)
    final = model.loss_history[-1]["total"]
    print(f"trained {args.variant} on {len(samples)} samples "
          f"(final loss {final:.6g}); checkpoint: {args.out}")
    return 0


def _write_curve(forces: np.ndarray, path) -> None:
    grid = np.linspace(0.0, HORIZON_S, GRID_N)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,Fx,Fy,Fz\n")
        for k in range(GRID_N):
            fh.write(",".join([repr(float(grid[k]))] +
                              [repr(float(forces[a, k])) for a in range(3)]) + "\n")


def cmd_translate(args) -> int:
    if (args.text is None) == (args.profile is None):
        raise _Usage("exactly one of --text or --profile is required")
    model = load_checkpoint(args.checkpoint)
    if args.profile is not None:
        if not args.corpus:
            raise _Usage("--profile needs --corpus to look up the record")
        samples = read_dataset(args.corpus)
        matches = [s for s in samples if s.id == args.profile]
        if not matches:
            raise InputError(f"no record {args.profile!r} in {args.corpus}")
        phrase = model.force_to_phrase(matches[0].profile)
        print(phrase_to_text(phrase))
        return 0
    explicit = args.provider is not None or _table_path(args)
    if explicit:
        provider = _resolve_provider(args)
    elif model.provider is not None:
        provider = model.provider
    else:
        provider = HashingProvider(args.embed_seed)
    forces, phrase = translate_text(model, args.text, provider=provider,
                                    sigma=args.sigma)
    _write_curve(forces, args.out)
    print(phrase_to_text(phrase))
    return 0


def _parse_variants(raw: str) -> list:
    names = [v.strip() for v in raw.split(",") if v.strip()]
    if not names:
        raise _Usage("no variants given")
    for name in names:
        if name not in VARIANTS:
            raise _Usage(f"unknown variant {name!r}; valid: {', '.join(VARIANTS)}")
    if len(set(names)) != len(names):
        raise _Usage("duplicate variant in --variants")
    return names


def _print_aggregates(report) -> None:
    print(f"protocol: {report.protocol}  seed: {report.seed}")
    header = f"{'variant':<10}" + "".join(f"{m:>12}" for m in METRICS) + f"{'rounds':>8}"
    print(header)
    for v in report.variants:
        row = f"{v.variant:<10}"
        for m in METRICS:
            row += f"{v.mean[m]:>12.4f}"
        row += f"{v.n_rounds:>8}"
        print(row)


def cmd_eval(args) -> int:
    variants = _parse_variants(args.variants)
    if args.trials < 1:
        raise _Usage("--trials must be positive")
    if not 0.0 < args.test_fraction < 1.0:
        raise _Usage("--test-fraction must be in (0, 1)")
    try:
        config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                             learning_rate=args.learning_rate)
    except InputError as e:
        raise _Usage(str(e)) from None
    samples = read_dataset(args.corpus)
    provider = _resolve_provider(args)
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    if args.protocol == "in_dist":
        report = run_in_distribution(samples, variants, provider,
                                     trials=args.trials,
                                     test_fraction=args.test_fraction,
                                     seed=args.seed, config=config, jobs=jobs)
    elif args.protocol == "ood_mod":
        report = run_ood_modifiers(samples, variants, provider,
                                   seed=args.seed, config=config, jobs=jobs)
    else:
        report = run_ood_directions(samples, variants, provider,
                                    seed=args.seed, config=config, jobs=jobs)
    emit_report(report, args.out, format="csv")
    if args.structured_out:
        emit_report(report, args.structured_out, format="structured")
    _print_aggregates(report)
    return 0


def cmd_vocab(args) -> int:
    lines = [f"# forcelang vocabulary v{VOCAB_VERSION}"]
    for word in MODIFIERS:
        lines.append(f"modifier\t{word}")
    for word in DIRECTIONS:
        lines.append(f"direction\t{word}")
    for phrase in all_phrases():
        lines.append(f"phrase\t{phrase_to_text(phrase)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_split(args) -> int:
    modes = [args.test_fraction is not None,
             args.holdout_modifier is not None,
             args.holdout_direction is not None]
    if sum(modes) != 1:
        raise _Usage("pick exactly one of --test-fraction, "
                     "--holdout-modifier, --holdout-direction")
    samples = read_dataset(args.corpus)
    if args.test_fraction is not None:
        if not 0.0 < args.test_fraction < 1.0:
            raise _Usage("--test-fraction must be in (0, 1)")
        train_side, test_side = split_random(samples, args.test_fraction,
                                             seed=args.seed)
    elif args.holdout_modifier is not None:
        train_side, test_side = split_holdout_token(samples, args.holdout_modifier,
                                                    slot="modifier")
    else:
        train_side, test_side = split_holdout_token(samples, args.holdout_direction,
                                                    slot="direction")
    write_dataset(train_side, args.out_train)
    write_dataset(test_side, args.out_test)
    print(f"{len(train_side)} train / {len(test_side)} test")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forcelang",
        description="Bidirectional force-profile / phrase translation toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen-data", help="synthesize a paired corpus")
    p.add_argument("--out", required=True, help="corpus JSONL path")
    p.add_argument("--participants", type=int, default=10)
    p.add_argument("--phrase-trials", type=int, default=42)
    p.add_argument("--description-trials", type=int, default=42)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--manifest", default=None,
                   help="manifest path (default: <out>.manifest.json)")
    p.set_defaults(func=cmd_gen_data)

    p = subs.add_parser("train", help="train one variant")
    p.add_argument("--corpus", required=True)
    p.add_argument("--variant", required=True, choices=VARIANTS)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--history", default=None,
                   help="loss history CSV path (default: <out>.loss.csv)")
    _add_provider_flags(p)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("translate", help="translate between text and force")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--text", default=None, help="free text to render as force")
    p.add_argument("--profile", default=None, metavar="RECORD_ID",
                   help="corpus record id to describe")
    p.add_argument("--corpus", default=None, help="corpus for --profile lookup")
    p.add_argument("--out", default="force_curve.csv",
                   help="force curve CSV path for --text")
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA,
                   help="similarity gate for text matching")
    _add_provider_flags(p)
    p.set_defaults(func=cmd_translate)

    p = subs.add_parser("eval", help="run an experiment protocol")
    p.add_argument("--corpus", required=True)
    p.add_argument("--variants", default=",".join(VARIANTS),
                   help="comma-separated variant names")
    p.add_argument("--protocol", required=True,
                   choices=("in_dist", "ood_mod", "ood_dir"))
    p.add_argument("--trials", type=int, default=30,
                   help="random-split trial count (in_dist only)")
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--out", default="report.csv", help="aggregate CSV path")
    p.add_argument("--structured-out", default=None,
                   help="also write the full structured report here")
    p.add_argument("--jobs", type=int, default=0,
                   help="parallel training workers (0 = logical cores)")
    _add_provider_flags(p)
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("vocab", help="print the vocabulary listing")
    p.add_argument("--out", default=None, help="write to a file instead of stdout")
    p.set_defaults(func=cmd_vocab)

    p = subs.add_parser("split", help="split a corpus into train/test files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.add_argument("--test-fraction", type=float, default=None)
    p.add_argument("--holdout-modifier", default=None)
    p.add_argument("--holdout-direction", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except ForcelangError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
