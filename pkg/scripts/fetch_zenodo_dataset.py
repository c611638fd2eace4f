#!/usr/bin/env python3
"""Download the published labelled-sentence corpus from Zenodo.

Fetches every file of the record into data/zenodo/raw/ and, when a CSV with
recognizable sentence/label columns is found, writes the normalized
data/zenodo/labelled_sentences.csv (header: sentence,label) that the
evaluation pipeline and the dataset-scale acceptance check consume.

Requires network access. Usage:
    python scripts/fetch_zenodo_dataset.py --record 12760951
"""

import argparse
import csv
import sys
from pathlib import Path

import requests

SENTENCE_COLUMNS = ("sentence", "text", "sent")
LABEL_COLUMNS = ("label", "regulatory", "class", "gold")


def download_record(record_id: str, raw_dir: Path) -> list[Path]:
    meta = requests.get(f"https://zenodo.org/api/records/{record_id}", timeout=60)
    meta.raise_for_status()
    files = meta.json().get("files", [])
    if not files:
        sys.exit(f"record {record_id} lists no files")
    raw_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for entry in files:
        name = entry["key"]
        url = entry["links"]["self"]
        target = raw_dir / name
        if target.exists():
            print(f"already present: {name}")
        else:
            print(f"downloading {name} ...")
            with requests.get(url, stream=True, timeout=600) as resp:
                resp.raise_for_status()
                with open(target, "wb") as fh:
                    for chunk in resp.iter_content(1 << 20):
                        fh.write(chunk)
        paths.append(target)
    return paths


def normalize(paths: list[Path], out_csv: Path) -> bool:
    for path in paths:
        if path.suffix.lower() != ".csv":
            continue
        with open(path, encoding="utf-8", errors="replace", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                continue
            lowered = {c.lower(): c for c in reader.fieldnames}
            sent_col = next((lowered[c] for c in SENTENCE_COLUMNS if c in lowered), None)
            label_col = next((lowered[c] for c in LABEL_COLUMNS if c in lowered), None)
            if sent_col is None or label_col is None:
                continue
            rows = []
            for row in reader:
                try:
                    label = int(float(row[label_col]))
                except (TypeError, ValueError):
                    break
                if label not in (0, 1):
                    break
                rows.append((row[sent_col], label))
            else:
                if rows:
                    with open(out_csv, "w", encoding="utf-8", newline="") as out:
                        writer = csv.writer(out)
                        writer.writerow(["sentence", "label"])
                        writer.writerows(rows)
                    print(f"wrote {out_csv} ({len(rows)} sentences, from {path.name})")
                    return True
    return False


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--record", default="12760951", help="Zenodo record id")
    parser.add_argument("--out", default="data/zenodo", help="output directory")
    args = parser.parse_args()
    out_dir = Path(args.out)
    paths = download_record(args.record, out_dir / "raw")
    if not normalize(paths, out_dir / "labelled_sentences.csv"):
        print(
            "no CSV with recognizable sentence/label columns found under "
            f"{out_dir/'raw'}; inspect the files and build labelled_sentences.csv "
            "by hand (header: sentence,label)",
            file=sys.stderr,
        )


if __name__ == "__main__":
    main()
