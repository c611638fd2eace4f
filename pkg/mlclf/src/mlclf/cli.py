"""mlclf command line: train, predict, serve."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .features import BACKBONES, extract_features
from .model import load_model, load_params, save_model, train
from .predict import predict_csv
from .serve import serve


def cmd_train(args: argparse.Namespace) -> int:
    with open(args.data, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "sentence" not in reader.fieldnames or "label" not in reader.fieldnames:
            print(f"{args.data}: expected header with 'sentence' and 'label'", file=sys.stderr)
            return 1
        rows = [(r["sentence"], int(r["label"])) for r in reader]
    sentences = [s for s, _ in rows]
    labels = [l for _, l in rows]
    print(f"extracting features for {len(sentences)} sentences with {args.backbone} ...", file=sys.stderr)
    features = extract_features(sentences, args.backbone)
    params = load_params(args.params) if args.params else None
    model, report, held_out = train(
        features, labels, split_seed=args.seed, test_fraction=args.test_fraction, params=params
    )
    save_model(model, args.model_out)
    print(json.dumps(report, indent=2))
    if args.export_heldout:
        out_dir = Path(args.export_heldout)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "heldout_gold.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sentence", "label"])
            writer.writerows(zip(held_out.sentences, held_out.gold))
        with open(out_dir / "heldout_predictions.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sentence", "score"])
            writer.writerows(zip(held_out.sentences, held_out.scores))
        print(f"held-out split exported to {out_dir}", file=sys.stderr)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    count = predict_csv(model, args.sentences, args.out)
    print(f"scored {count} sentences", file=sys.stderr)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    return serve(model)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlclf", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("train", help="extract features and fit the boosted-tree head")
    p.add_argument("--data", required=True, help="CSV: sentence,label")
    p.add_argument("--backbone", choices=sorted(BACKBONES), default="legal-bert")
    p.add_argument("--seed", required=True, type=int, help="split/ensemble seed")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--params", help="JSON overriding the pinned tree hyperparameters")
    p.add_argument("--model-out", required=True)
    p.add_argument("--export-heldout", help="directory for held-out gold/prediction CSVs")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write a sentence,score prediction CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--sentences", required=True, help="CSV with a 'sentence' column")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="answer the line-oriented JSON prediction protocol on stdio")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_serve)
    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
