#!/usr/bin/env python3
"""Re-parse the labelled corpus with spaCy and emit CoNLL-U for the rule engine.

The classifier is parser-agnostic; this is the documented reference recipe:
spaCy 3.x with the small English model, whose dependency labels follow the
ClearNLP style our legacy_clear scheme maps ("nsubjpass", "agent", "pobj").

    pip install 'spacy>=3.7'
    python -m spacy download en_core_web_sm
    python scripts/parse_with_spacy.py \
        --csv data/zenodo/labelled_sentences.csv \
        --out data/zenodo/labelled_sentences.conllu
"""

import argparse
import csv
from pathlib import Path


def to_conllu_block(doc, text: str) -> str:
    lines = [f"# text = {text}"]
    # one tree per block: if spaCy split the input into several sentence
    # spans, later roots are re-attached under the first one
    roots = [tok.i for tok in doc if tok.head is tok]
    first_root = roots[0] if roots else 0
    for i, tok in enumerate(doc, start=1):
        if tok.head is tok:
            head = 0 if tok.i == first_root else first_root + 1
            deprel = tok.dep_ or "ROOT" if tok.i == first_root else "dep"
        else:
            head = tok.head.i + 1
            deprel = tok.dep_ or "dep"
        misc = "_" if tok.whitespace_ else "SpaceAfter=No"
        lines.append(
            "\t".join([
                str(i), tok.text, tok.lemma_ or tok.text, tok.pos_ or "X",
                tok.tag_ or "_", "_", str(head), deprel, "_", misc,
            ])
        )
    return "\n".join(lines)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True, help="input CSV with a 'sentence' column")
    parser.add_argument("--out", required=True, help="output CoNLL-U path")
    parser.add_argument("--model", default="en_core_web_sm")
    args = parser.parse_args()

    import spacy

    nlp = spacy.load(args.model, disable=["ner"])
    with open(args.csv, encoding="utf-8", newline="") as fh:
        sentences = [row["sentence"] for row in csv.DictReader(fh)]

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# scheme = legacy_clear\n")
        for n, text in enumerate(sentences, start=1):
            doc = nlp(text)
            fh.write(to_conllu_block(doc, text) + "\n\n")
            if n % 500 == 0:
                print(f"parsed {n}/{len(sentences)}")
    print(f"wrote {out} ({len(sentences)} sentences)")


if __name__ == "__main__":
    main()
