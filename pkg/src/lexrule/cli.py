"""Command-line entry point wiring the pipeline stages together.

Subcommands: extract, sentences, sample, classify, evaluate, explain. Every
randomized stage takes an explicit --seed; outputs carry no timestamps, so
identical inputs and flags always produce identical files. Exit codes: 0 ok,
1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import shlex
import sys
import tempfile
import time
from pathlib import Path

from . import classifiers, conllu, corpus, explain, lexicon, metrics, ruleclf

DATA_DIR = Path(__file__).parent / "data"


@contextlib.contextmanager
def atomic_open(path: str | Path):
    """Write to a temp file in the target directory, rename into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _progress(i: int, label: str) -> None:
    if i and i % 50 == 0:
        print(f"{label}: {i}", file=sys.stderr)


def _existing(path: str) -> str:
    if not os.path.exists(path):
        raise argparse.ArgumentTypeError(f"path does not exist: {path}")
    return path


def _read_gold_csv(path: str) -> list[tuple[str, int]]:
    rows: list[tuple[str, int]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "sentence" not in reader.fieldnames or "label" not in reader.fieldnames:
            raise ValueError(f"{path}: expected header with 'sentence' and 'label'")
        for line_no, row in enumerate(reader, start=2):
            label = int(row["label"])
            if label not in (0, 1):
                raise ValueError(f"{path}:{line_no}: label must be 0 or 1")
            rows.append((row["sentence"], label))
    return rows


def cmd_extract(args: argparse.Namespace) -> int:
    markers = corpus.load_markers(args.markers)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    docs = sorted(Path(args.docs).glob("*.txt"))
    if not docs:
        print(f"no .txt documents under {args.docs}", file=sys.stderr)
        return 1
    for i, doc in enumerate(docs):
        try:
            section = corpus.extract_regulatory_section(doc.read_text(encoding="utf-8"), markers)
        except (corpus.NoStartMarker, corpus.NoEndMarker) as exc:
            print(f"{doc}: {exc}", file=sys.stderr)
            failures += 1
            continue
        with atomic_open(out_dir / doc.name) as fh:
            fh.write(section + "\n")
        _progress(i + 1, "extracted")
    return 1 if failures else 0


def cmd_sentences(args: argparse.Namespace) -> int:
    abbrevs = corpus.load_phrase_file(args.abbreviations)
    sections = sorted(Path(args.sections).glob("*.txt"))
    if not sections:
        print(f"no .txt sections under {args.sections}", file=sys.stderr)
        return 1
    with atomic_open(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "index_in_doc", "text"])
        for i, section in enumerate(sections):
            doc_id = section.stem
            sentences = corpus.segment_sentences(
                section.read_text(encoding="utf-8"),
                abbreviations=abbrevs,
                split_on_semicolon=not args.no_semicolon_split,
            )
            for cand in corpus.filter_deontic(sentences, doc_id=doc_id):
                writer.writerow([cand.doc_id, cand.index_in_doc, cand.text])
            _progress(i + 1, "segmented")
    return 0


def _read_candidates_csv(path: str) -> list[corpus.CandidateSentence]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            tokens = tuple(
                m.group(1).lower() for m in corpus.DEONTIC_PATTERN.finditer(row["text"])
            ) or ("shall",)
            out.append(corpus.CandidateSentence(
                doc_id=row["doc_id"],
                index_in_doc=int(row["index_in_doc"]),
                text=row["text"],
                deontic_tokens=tokens,
            ))
    return out


def cmd_sample(args: argparse.Namespace) -> int:
    candidates = _read_candidates_csv(args.candidates)
    metadata: dict[str, tuple[int, str]] = {}
    with open(args.metadata, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            metadata[row["celex_id"]] = (int(row["adoption_year"]), row["policy_area"])
    sample = corpus.stratify_sample(candidates, metadata, args.per_stratum, args.seed)
    with atomic_open(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "index_in_doc", "text"])
        for cand in sample:
            writer.writerow([cand.doc_id, cand.index_in_doc, cand.text])
    print(f"sampled {len(sample)} sentences", file=sys.stderr)
    return 0


def _lexicon_path(args: argparse.Namespace) -> str:
    path = args.lexicon or os.environ.get("LEXRULE_LEXICON") or str(DATA_DIR / "agent_lexicon.txt")
    if not os.path.exists(path):
        raise FileNotFoundError(f"lexicon not found: {path}")
    return path


def cmd_classify(args: argparse.Namespace) -> int:
    agent_lexicon = lexicon.load_lexicon(_lexicon_path(args))
    print(f"lexicon: {len(agent_lexicon)} entries", file=sys.stderr)
    sentences = conllu.read_conllu_file(args.conllu, scheme=args.deprel_scheme)
    profile = ruleclf.RuleProfile(mode=args.profile)
    fallback = None
    if args.hybrid:
        if not args.fallback_cmd:
            print("--hybrid requires --fallback-cmd", file=sys.stderr)
            return 2
        fallback = classifiers.classifier_from_subprocess(
            shlex.split(args.fallback_cmd), timeout=args.fallback_timeout
        )
    outcomes = []
    try:
        for i, sent in enumerate(sentences):
            if fallback is not None:
                outcome = ruleclf.classify_hybrid(
                    sent, agent_lexicon, profile, fallback, delegate_always=args.delegate_always
                )
            else:
                outcome = ruleclf.classify_rule(sent, agent_lexicon, profile)
            outcomes.append(outcome)
            _progress(i + 1, "classified")
    finally:
        if fallback is not None:
            fallback.close()
    with atomic_open(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(ruleclf.OUTCOME_CSV_HEADER)
        writer.writerows(ruleclf.outcome_csv_rows([s.text for s in sentences], outcomes))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold_rows = _read_gold_csv(args.gold)
    gold = [label for _, label in gold_rows]
    preds: dict[str, list[int]] = {}
    for spec in args.pred:
        name, _, path = spec.rpartition("=")
        if not name:
            name, path = Path(path).stem, path
        table = classifiers.classifier_from_predictions(path, name=name)
        scores = table.classify_batch([sentence for sentence, _ in gold_rows])
        preds[name] = [1 if score >= 0.5 else 0 for score in scores]
    report = metrics.compare_models(gold, preds)
    print(metrics.format_table(report))
    if args.out_json:
        with atomic_open(args.out_json) as fh:
            fh.write(metrics.report_to_json(report) + "\n")
    return 0


def cmd_explain(args: argparse.Namespace) -> int:
    gold_rows = _read_gold_csv(args.sentences)
    cfg_kwargs = dict(
        n_samples=args.n_samples,
        keep_probability=args.keep_prob,
        kernel_width=args.kernel_width,
        ridge_lambda=args.ridge_lambda,
        ngram=args.ngram,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    classifier = classifiers.classifier_from_subprocess(
        shlex.split(args.cmd), timeout=args.fallback_timeout
    )
    try:
        full_scores = classifier.classify_batch([s for s, _ in gold_rows])
        outcomes = []
        for (_, gold_label), score in zip(gold_rows, full_scores):
            pred = 1 if score >= 0.5 else 0
            outcomes.append("TP" if pred == gold_label == 1 else
                            "TN" if pred == gold_label == 0 else
                            "FP" if pred == 1 else "FN")
        expls = []
        with atomic_open(out_dir / "explanations.jsonl") as fh:
            for i, (sentence, _) in enumerate(gold_rows):
                cfg = explain.ExplainConfig(seed=args.seed + i, **cfg_kwargs)
                expl = explain.explain_sentence(sentence, classifier, cfg)
                expls.append(expl)
                fh.write(explain.explanation_to_json(expl) + "\n")
                _progress(i + 1, "explained")
    finally:
        classifier.close()

    tables = explain.aggregate_influential(expls, outcomes, k=args.k, min_freq=args.min_freq)
    with atomic_open(out_dir / "influential_words.csv") as fh:
        writer = csv.writer(fh)
        writer.writerow(["token", "class", "frequency"])
        for cls, rows in tables.items():
            for token, freq in rows:
                writer.writerow([token, cls, freq])

    stats = explain.position_stats(expls, outcomes, k=args.k)
    with atomic_open(out_dir / "position_stats.csv") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "stat", "position_pct", "sent_chars"])
        for cls, block in stats.items():
            for stat in ("mean", "median", "stddev"):
                writer.writerow([
                    cls, stat,
                    getattr(block["position_pct"], stat),
                    getattr(block["sent_chars"], stat),
                ])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexrule", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("extract", help="cut the enacting terms out of full document texts")
    p.add_argument("--docs", required=True, type=_existing, help="directory of <celex_id>.txt files")
    p.add_argument("--markers", type=_existing, default=str(DATA_DIR / "markers.txt"))
    p.add_argument("--out", required=True, help="output directory for section files")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("sentences", help="segment sections and keep deontic candidates")
    p.add_argument("--sections", required=True, type=_existing)
    p.add_argument("--abbreviations", type=_existing, default=str(DATA_DIR / "abbreviations.txt"))
    p.add_argument("--no-semicolon-split", action="store_true")
    p.add_argument("--out", required=True, help="candidate CSV (doc_id,index_in_doc,text)")
    p.set_defaults(func=cmd_sentences)

    p = sub.add_parser("sample", help="stratified equal-allocation sample of candidates")
    p.add_argument("--candidates", required=True, type=_existing)
    p.add_argument("--metadata", required=True, type=_existing,
                   help="CSV: celex_id,adoption_year,policy_area,legal_form")
    p.add_argument("--per-stratum", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("classify", help="run the dependency rules over parsed sentences")
    p.add_argument("--conllu", required=True, type=_existing)
    p.add_argument("--lexicon", help="agent lexicon path (default: $LEXRULE_LEXICON or bundled)")
    p.add_argument("--profile", choices=["v1", "refined"], default="v1")
    p.add_argument("--deprel-scheme", choices=list(conllu.SCHEMES), default="ud_v2")
    p.add_argument("--hybrid", action="store_true", help="delegate attribute failures to a fallback")
    p.add_argument("--fallback-cmd", help="command for a prediction-protocol child process")
    p.add_argument("--delegate-always", action="store_true",
                   help="delegate every attribute failure, not just the promising ones")
    p.add_argument("--fallback-timeout", type=float, default=30.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score prediction files against gold labels")
    p.add_argument("--gold", required=True, type=_existing, help="CSV: sentence,label")
    p.add_argument("--pred", required=True, action="append",
                   help="prediction CSV, optionally name=path; repeatable")
    p.add_argument("--out-json", help="also write the report as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="token-masking attributions plus aggregate tables")
    p.add_argument("--sentences", required=True, type=_existing, help="CSV: sentence,label")
    p.add_argument("--cmd", required=True, help="command for the classifier child process")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--n-samples", type=int, default=1000)
    p.add_argument("--keep-prob", type=float, default=0.5)
    p.add_argument("--kernel-width", type=float, default=0.75)
    p.add_argument("--ridge-lambda", type=float, default=1.0)
    p.add_argument("--ngram", type=int, default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--min-freq", type=int, default=5)
    p.add_argument("--fallback-timeout", type=float, default=30.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_explain)
    return parser


DATA_ERRORS = (OSError, ValueError, KeyError, RuntimeError)


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.monotonic()
    try:
        code = args.func(args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    # timing goes to the log stream; output files stay timestamp-free
    print(f"{args.subcommand}: done in {time.monotonic() - started:.2f}s", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
