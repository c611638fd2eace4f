"""Line-oriented JSON prediction service over stdin/stdout.

Protocol (one JSON object per line, UTF-8):
    request   {"id": <int>, "text": <string>}
    response  {"id": <int>, "p_regulatory": <float in [0,1]>}
    shutdown  {"cmd": "quit"}
Requests are handled strictly in arrival order. stdout carries protocol lines
only; anything else (including complaints about undecodable input) goes to
stderr. An untokenizable text, e.g. the empty string produced by aggressive
token masking, is answered with the neutral score 0.5 rather than breaking
the response stream.
"""

from __future__ import annotations

import json
import sys
from typing import TextIO

from .features import TokenizationError, extract_features
from .model import TrainedModel


def serve(model: TrainedModel, stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except ValueError:
            print(f"ignoring undecodable line: {line[:80]!r}", file=sys.stderr)
            continue
        if msg.get("cmd") == "quit":
            return 0
        try:
            req_id = msg["id"]
            text = msg["text"]
        except KeyError:
            print(f"ignoring incomplete request: {line[:80]!r}", file=sys.stderr)
            continue
        try:
            matrix = extract_features([text], model.backbone_name)
            score = model.predict_scores(matrix.rows)[0]
        except TokenizationError:
            score = 0.5
        stdout.write(json.dumps({"id": req_id, "p_regulatory": score}) + "\n")
        stdout.flush()
    return 0
