#!/usr/bin/env python3
"""Rebuild the agent-noun lexicon snapshot from the ConceptNet public API.

Exact query: for each frontier concept, GET
    https://api.conceptnet.io/query?end=/c/en/<concept>&rel=/r/IsA&limit=1000
and collect the English start terms, i.e. terms X with an edge
    X --IsA--> <concept>.
Starting from /c/en/agent, the collection recurses to --depth levels
(default 2) so common hyponym chains like worker -> person -> agent are
covered. Terms are kept when they are 1-4 lower-case words with no digits.
The result is a versioned data file; review the diff before committing a new
snapshot, the API surface mixes expert and crowd-sourced edges.

Requires network access. Usage:
    python scripts/build_agent_lexicon.py --out src/lexrule/data/agent_lexicon.txt
"""

import argparse
import re
import time
from pathlib import Path

import requests

API = "https://api.conceptnet.io/query"
TERM_OK = re.compile(r"^[a-z]+( [a-z]+){0,3}$")


def hyponyms_of(concept: str, session: requests.Session) -> set[str]:
    terms: set[str] = set()
    offset = 0
    while True:
        resp = session.get(
            API,
            params={"end": f"/c/en/{concept}", "rel": "/r/IsA", "limit": 1000, "offset": offset},
            timeout=60,
        )
        resp.raise_for_status()
        edges = resp.json().get("edges", [])
        for edge in edges:
            start = edge.get("start", {})
            if start.get("language") != "en":
                continue
            label = start.get("label", "").strip().lower().replace("_", " ")
            if TERM_OK.match(label):
                terms.add(label)
        if len(edges) < 1000:
            return terms
        offset += 1000
        time.sleep(0.5)  # public API politeness


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--root", default="agent")
    parser.add_argument("--depth", type=int, default=2)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    session = requests.Session()
    collected: set[str] = set()
    frontier = {args.root}
    for level in range(args.depth):
        next_frontier: set[str] = set()
        for concept in sorted(frontier):
            found = hyponyms_of(concept.replace(" ", "_"), session)
            print(f"depth {level}: {concept} -> {len(found)} terms")
            next_frontier |= found - collected
            collected |= found
            time.sleep(0.5)
        frontier = next_frontier

    out = Path(args.out)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# Agent-noun lexicon snapshot.\n")
        fh.write(f"# Rebuilt by scripts/build_agent_lexicon.py --root {args.root} --depth {args.depth}\n")
        fh.write("# Review before committing; see the script docstring for the exact query.\n")
        for term in sorted(collected):
            fh.write(term + "\n")
    print(f"wrote {out} ({len(collected)} terms)")


if __name__ == "__main__":
    main()
