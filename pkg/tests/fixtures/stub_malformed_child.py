#!/usr/bin/env python3
"""Prediction-protocol child that violates the protocol with a non-JSON line."""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    msg = json.loads(line)
    if msg.get("cmd") == "quit":
        sys.exit(0)
    print("this is not a protocol line", flush=True)
