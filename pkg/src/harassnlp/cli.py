"""Command-line surface for every pipeline stage.

Exit code 0 on success, 2 on any input contract violation. Data goes to
stdout (or ``--output``); diagnostics go to stderr. A JSON config file
keyed by subcommand can pre-set any flag; explicit flags win. Defaulted
seeds are printed to stderr so every run is reproducible.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import agreement, crowd, topics
from .bayes import train_gaussian, train_multinomial, vocab_hash
from .corpus import (
    Corpus,
    PreprocessConfig,
    dedupe,
    infer_gender,
    ingest,
    load_gender_lexicon,
    preprocess_corpus,
    write_jsonl,
)
from .evaluation import (
    CANONICAL_METHODS,
    EvalParams,
    ResultsTable,
    cross_validate,
    emit_table,
    normalize_method,
    stratified_kfold,
)
from .exceptions import ToolkitError, UndefinedKappaError
from .features import NgramSpec, build_vocab, vectorize
from .neural import LstmConfig, SgdConfig, lstm_train, train_pvdbow, train_skipgram
from .taxonomy import Category, Gender, LegacyCategory, remap_legacy

DEFAULT_SEED = 0


def _out_stream(path: Optional[str]):
    return Path(path).open("w", encoding="utf-8") if path else sys.stdout


def _emit(text: str, path: Optional[str]) -> None:
    stream = _out_stream(path)
    try:
        stream.write(text)
    finally:
        if stream is not sys.stdout:
            stream.close()


def _seed_value(args, name: str = "seed") -> int:
    value = getattr(args, name, None)
    if value is None:
        print(f"seed={DEFAULT_SEED}", file=sys.stderr)
        return DEFAULT_SEED
    return value


def _load_corpus(path: str, preprocessed: bool = True) -> Corpus:
    corpus = ingest(path)
    if preprocessed and not all(d.preprocessed for d in corpus):
        raise ToolkitError(
            f"{path}: corpus is not preprocessed (run the preprocess command first)"
        )
    return corpus


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------


def cmd_ingest(args) -> int:
    corpus = ingest(args.input, format=args.format)
    out = _out_stream(args.output)
    try:
        from .corpus import document_to_record

        for doc in corpus:
            out.write(json.dumps(document_to_record(doc), ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"ingested {len(corpus)} documents", file=sys.stderr)
    return 0


def cmd_preprocess(args) -> int:
    corpus = ingest(args.input)
    config = PreprocessConfig(
        english_only=bool(args.english_only),
        max_hashtag_ratio=args.max_hashtag_ratio,
    )
    processed = preprocess_corpus(corpus, config)
    if args.output:
        write_jsonl(processed, args.output)
    else:
        from .corpus import document_to_record

        for doc in processed:
            sys.stdout.write(
                json.dumps(document_to_record(doc), ensure_ascii=False) + "\n"
            )
    print(
        f"preprocessed {len(processed)} of {len(corpus)} documents", file=sys.stderr
    )
    return 0


def cmd_dedupe(args) -> int:
    corpus = _load_corpus(args.input)
    kept = dedupe(corpus)
    if args.output:
        write_jsonl(kept, args.output)
    else:
        from .corpus import document_to_record

        for doc in kept:
            sys.stdout.write(
                json.dumps(document_to_record(doc), ensure_ascii=False) + "\n"
            )
    print(f"kept {len(kept)} of {len(corpus)} documents", file=sys.stderr)
    return 0


def cmd_featurize(args) -> int:
    corpus = _load_corpus(args.input)
    spec = NgramSpec.parse(args.spec)
    vocab = build_vocab(corpus, spec, min_df=args.min_df)
    Path(args.vocab).write_text(vocab.to_json(), encoding="utf-8")
    print(f"vocabulary: {len(vocab)} features", file=sys.stderr)
    if args.vectors:
        with Path(args.vectors).open("w", encoding="utf-8") as out:
            for doc in corpus:
                vector = vectorize(doc, vocab)
                out.write(
                    json.dumps(
                        {
                            "id": doc.id,
                            "counts": {str(k): v for k, v in vector.entries.items()},
                        }
                    )
                    + "\n"
                )
    return 0


def _labeled(corpus: Corpus):
    labels = [d.label for d in corpus]
    if any(label is None for label in labels):
        raise ToolkitError("every document needs a label for training/evaluation")
    return labels


def cmd_train(args) -> int:
    method = normalize_method(args.method)
    corpus = _load_corpus(args.input)
    labels = _labeled(corpus)
    seed = _seed_value(args)
    tokens = [d.tokens or () for d in corpus]
    if method in ("word2vec", "doc2vec"):
        sgd = SgdConfig(epochs=args.epochs or 5, seed=seed)
        if method == "word2vec":
            table = train_skipgram(tokens, sgd, dim=args.dim)
            from .neural import doc_embed_average

            X = [doc_embed_average(t, table) for t in tokens]
            model = train_gaussian(X, labels)
            payload = {"embedding": json.loads(table.to_json()),
                       "classifier": json.loads(model.to_json())}
        else:
            table = train_pvdbow(tokens, sgd, dim=args.dim)
            model = train_gaussian(table.doc_vectors, labels)
            payload = {"embedding": json.loads(table.to_json()),
                       "classifier": json.loads(model.to_json())}
        Path(args.model).write_text(json.dumps(payload), encoding="utf-8")
    elif method == "lstm":
        config = LstmConfig(seed=seed, epochs=args.epochs or 50)
        classifier = lstm_train(tokens, labels, config)
        Path(args.model).write_text(classifier.to_json(), encoding="utf-8")
    else:
        from .evaluation import _BOW_SPECS

        spec = NgramSpec.parse(_BOW_SPECS[method])
        vocab = build_vocab(corpus, spec, min_df=args.min_df)
        X = [vectorize(d, vocab) for d in corpus]
        model = train_multinomial(
            X,
            labels,
            alpha=args.alpha,
            vocab_size=max(len(vocab), 1),
            vocab_ref=vocab_hash(vocab),
        )
        payload = {
            "vocabulary": json.loads(vocab.to_json()),
            "classifier": json.loads(model.to_json()),
        }
        Path(args.model).write_text(json.dumps(payload), encoding="utf-8")
    print(f"trained {method} on {len(corpus)} documents", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    corpus = _load_corpus(args.input)
    labels = _labeled(corpus)
    seed = _seed_value(args)
    plan = stratified_kfold(labels, args.k, seed=seed)
    params = EvalParams(min_df=args.min_df, alpha=args.alpha)
    results = [
        cross_validate(method, corpus, plan, params) for method in args.method
    ]
    table = emit_table(results)
    _emit(table.to_csv(), args.output)
    if args.text:
        print(table.to_text(), file=sys.stderr)
    return 0


def _kappa_payload(matrix: agreement.RatingMatrix) -> dict:
    try:
        result = agreement.fleiss_kappa(matrix)
        return {
            "kappa": result.kappa,
            "p_bar": result.p_bar,
            "p_e": result.p_e,
            "n_items": matrix.n_items,
            "m": matrix.m,
        }
    except UndefinedKappaError as exc:
        return {
            "kappa": None,
            "p_bar": exc.p_bar,
            "p_e": exc.p_e,
            "n_items": matrix.n_items,
            "m": matrix.m,
        }


def cmd_kappa(args) -> int:
    records = agreement.load_label_records(args.labels)
    categories = tuple(range(1, args.categories + 1)) if args.categories else None
    matrix = agreement.from_labels(records, categories=categories)
    _emit(json.dumps(_kappa_payload(matrix)) + "\n", args.output)
    return 0


def cmd_merge_kappa(args) -> int:
    records = agreement.load_label_records(args.labels)
    if args.mapping:
        raw = json.loads(Path(args.mapping).read_text(encoding="utf-8"))
        mapping = {int(k): int(v) for k, v in raw.items()}
    else:
        mapping = {int(old): int(remap_legacy(old)) for old in LegacyCategory}
    matrix = agreement.from_labels(
        records, categories=tuple(sorted(mapping.keys()))
    )
    merged = agreement.merge_categories(matrix, mapping)
    payload = {
        "before": _kappa_payload(matrix),
        "after": _kappa_payload(merged),
        "mapping": {str(k): v for k, v in sorted(mapping.items())},
    }
    _emit(json.dumps(payload) + "\n", args.output)
    return 0


def cmd_crowd_score(args) -> int:
    print(crowd.batch_policy(args.gold_correct))
    return 0


def cmd_crowd_aggregate(args) -> int:
    records = agreement.load_label_records(args.labels)
    trusts: dict[str, float] = {}
    import csv as csv_mod

    with Path(args.trusts).open(encoding="utf-8", newline="") as handle:
        reader = csv_mod.DictReader(handle)
        if reader.fieldnames is None or set(reader.fieldnames) < {
            "rater_id",
            "trust",
        }:
            raise ToolkitError("trusts CSV needs a 'rater_id,trust' header")
        for row in reader:
            trusts[row["rater_id"]] = float(row["trust"])
    by_item: dict[str, list] = {}
    for item, rater, category in records:
        by_item.setdefault(item, []).append((rater, Category(category)))
    out = _out_stream(args.output)
    try:
        for item in by_item:
            label = crowd.aggregate(item, by_item[item], trusts)
            out.write(
                json.dumps(
                    {
                        "item_id": label.item_id,
                        "category": int(label.category),
                        "confidence": label.confidence,
                        "votes": {str(int(c)): v for c, v in label.votes.items()},
                    }
                )
                + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _parse_rater_profiles(text: str) -> list[tuple[float, int]]:
    profiles = []
    for piece in text.split(","):
        try:
            accuracy, count = piece.split("x")
            profiles.append((float(accuracy), int(count)))
        except ValueError as exc:
            raise ToolkitError(
                f"bad rater profile {piece!r}; expected like '0.9x5,0.75x8'"
            ) from exc
    return profiles


def cmd_crowd_simulate(args) -> int:
    corpus = ingest(args.corpus)
    gold = crowd.load_gold_csv(args.gold)
    seed = _seed_value(args)
    outcome = crowd.simulate_study(
        corpus,
        gold,
        _parse_rater_profiles(args.raters),
        seed=seed,
        raters_per_item=args.raters_per_item,
        gold_ratio=args.gold_ratio,
    )
    out = _out_stream(args.output)
    try:
        for label in outcome.labels:
            out.write(
                json.dumps(
                    {
                        "item_id": label.item_id,
                        "category": int(label.category),
                        "confidence": label.confidence,
                        "votes": {str(int(c)): v for c, v in label.votes.items()},
                    }
                )
                + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    histogram = {
        str(int(c)): {"count": n, "mean_confidence": conf}
        for c, (n, conf) in outcome.histogram.items()
    }
    print(json.dumps({"histogram": histogram}), file=sys.stderr)
    if args.states:
        with Path(args.states).open("w", encoding="utf-8") as handle:
            for state in outcome.rater_states:
                handle.write(
                    json.dumps(
                        {
                            "rater_id": state.rater_id,
                            "trust": state.trust,
                            "gold_answered": state.gold_answered,
                            "gold_correct": state.gold_correct,
                            "batch_size": state.batch_size,
                            "excluded": state.excluded,
                        }
                    )
                    + "\n"
                )
    return 0


def cmd_lda(args) -> int:
    corpus = _load_corpus(args.input)
    seed = _seed_value(args)
    model = topics.fit_lda(
        [d.tokens or () for d in corpus],
        n_topics=args.topics,
        alpha=args.alpha,
        beta=args.beta,
        iterations=args.iterations,
        seed=seed,
    )
    hashtags = topics.suggest_hashtags(model, args.terms)
    out = _out_stream(args.output)
    try:
        for topic in range(model.n_topics):
            out.write(
                json.dumps(
                    {
                        "topic": topic,
                        "top_terms": [
                            [term, prob]
                            for term, prob in topics.top_terms(
                                model, topic, args.terms
                            )
                        ],
                        "hashtags": hashtags[topic],
                    }
                )
                + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_gender(args) -> int:
    corpus = _load_corpus(args.input)
    pole = Gender.MALE if args.positive_pole == "male" else Gender.FEMALE
    lexicon = load_gender_lexicon(args.lexicon, positive_pole=pole)
    out = _out_stream(args.output)
    try:
        for doc in corpus:
            gender, score = infer_gender(doc, lexicon)
            out.write(
                json.dumps(
                    {"id": doc.id, "gender": gender.value, "score": score}
                )
                + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_study

    study = load_study(args.config_file)
    app = create_app(study, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ----------------------------------------------------------------------
# parser wiring and config-file merging
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harassnlp",
        description="Harassment tweet classification and annotation toolkit",
    )
    parser.add_argument(
        "--config", help="JSON config file keyed by subcommand", default=None
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read a corpus file, emit normalized JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("preprocess", help="tokenize and filter a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--english-only", action="store_true", default=None)
    p.add_argument("--max-hashtag-ratio", type=float, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("dedupe", help="drop repeated token sequences")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_dedupe)

    p = sub.add_parser("featurize", help="build a vocabulary (and vectors)")
    p.add_argument("--input", required=True)
    p.add_argument("--spec", required=True, help="for example w2+c3")
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--vocab", required=True, help="vocabulary JSON output path")
    p.add_argument("--vectors", default=None, help="optional vectors JSONL path")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train one method on a labeled corpus")
    p.add_argument("--method", required=True, help=", ".join(CANONICAL_METHODS))
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True, help="model JSON output path")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="stratified k-fold evaluation")
    p.add_argument("--method", action="append", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default=None, help="results CSV path")
    p.add_argument("--text", action="store_true", help="also print a text table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("kappa", help="Fleiss' kappa from a label CSV")
    p.add_argument("--labels", required=True)
    p.add_argument(
        "--categories", type=int, default=None,
        help="fix the category count (columns 1..N)",
    )
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser(
        "merge-kappa", help="kappa before/after merging categories"
    )
    p.add_argument("--labels", required=True)
    p.add_argument(
        "--mapping", default=None,
        help="JSON old->new map; defaults to the built-in 9-to-5 merge",
    )
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_merge_kappa)

    p = sub.add_parser("crowd", help="trust scoring and label aggregation")
    crowd_sub = p.add_subparsers(dest="crowd_command", required=True)

    q = crowd_sub.add_parser("score", help="batch size for a gold-window score")
    q.add_argument("--gold-correct", type=int, required=True)
    q.set_defaults(func=cmd_crowd_score)

    q = crowd_sub.add_parser("aggregate", help="trust-weighted consensus labels")
    q.add_argument("--labels", required=True)
    q.add_argument("--trusts", required=True)
    q.add_argument("--output", default=None)
    q.set_defaults(func=cmd_crowd_aggregate)

    q = crowd_sub.add_parser("simulate", help="run a synthetic labeling study")
    q.add_argument("--corpus", required=True)
    q.add_argument("--gold", required=True)
    q.add_argument("--raters", required=True, help="profiles like 0.9x5,0.75x8")
    q.add_argument("--raters-per-item", type=int, default=3)
    q.add_argument("--gold-ratio", type=float, default=crowd.DEFAULT_GOLD_RATIO)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--states", default=None, help="rater states JSONL path")
    q.add_argument("--output", default=None)
    q.set_defaults(func=cmd_crowd_simulate)

    p = sub.add_parser("lda", help="topic model for hashtag discovery")
    p.add_argument("--input", required=True)
    p.add_argument("--topics", type=int, default=10)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--terms", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_lda)

    p = sub.add_parser("gender", help="lexicon-based author gender scores")
    p.add_argument("--input", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument(
        "--positive-pole", choices=["female", "male"], default="female"
    )
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_gender)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument(
        "--config-file", required=True, dest="config_file",
        help="study config JSON (corpus, gold, log paths)",
    )
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="static UI directory to serve")
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold config-file values in as defaults; explicit flags still win."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        raise ToolkitError("--config needs a path")
    config_path = argv[at + 1]
    rest = argv[:at] + argv[at + 2 :]
    payload = json.loads(Path(config_path).read_text(encoding="utf-8"))
    if not isinstance(payload, dict):
        raise ToolkitError("config file must be a JSON object keyed by subcommand")

    sub_actions = [
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    ]
    known_commands = set(sub_actions[0].choices)
    unknown = set(payload) - known_commands
    if unknown:
        raise ToolkitError(f"unknown config keys: {sorted(unknown)}")

    positionals = [a for a in rest if not a.startswith("-")]
    command = positionals[0] if positionals else None
    section = payload.get(command or "", {})
    if not isinstance(section, dict):
        raise ToolkitError(f"config section {command!r} must be an object")
    if command:
        subparser = sub_actions[0].choices[command]
        anchor = command
        nested = [
            a
            for a in subparser._actions
            if isinstance(a, argparse._SubParsersAction)
        ]
        if nested:
            # two-level commands like "crowd simulate": the config section
            # nests one more level and flags attach to the inner parser
            inner = positionals[1] if len(positionals) > 1 else None
            if inner not in nested[0].choices:
                raise ToolkitError(f"missing or unknown {command} subcommand")
            inner_section = section.get(inner, {})
            unknown_inner = set(section) - set(nested[0].choices)
            if unknown_inner:
                raise ToolkitError(
                    f"unknown config keys under {command!r}: {sorted(unknown_inner)}"
                )
            subparser = nested[0].choices[inner]
            section = inner_section
            anchor = inner
        known_flags = {
            a.dest: a for a in subparser._actions if a.option_strings
        }
        injected: list[str] = []
        for key, value in section.items():
            dest = key.replace("-", "_")
            if dest not in known_flags:
                raise ToolkitError(
                    f"unknown config option {key!r} for {anchor!r}"
                )
            flag = known_flags[dest].option_strings[0]
            if flag in rest:
                continue  # explicit flag wins
            if isinstance(value, bool):
                if value:
                    injected.append(flag)
            elif isinstance(value, list):
                for item in value:
                    injected += [flag, str(item)]
            else:
                injected += [flag, str(value)]
        head = rest[: rest.index(anchor) + 1]
        tail = rest[rest.index(anchor) + 1 :]
        rest = head + injected + tail
    return rest


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ToolkitError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
