"""Uniform classifier surface: in-process callables, prediction tables, and
child processes speaking the line-oriented JSON prediction protocol.

Protocol (UTF-8 JSON, one object per line, over the child's stdin/stdout):
    request   {"id": <int>, "text": <string>}
    response  {"id": <int>, "p_regulatory": <float in [0,1]>}
    shutdown  {"cmd": "quit"}
Responses may arrive out of order; ids match them back to requests. The child
must not write anything else to stdout (diagnostics belong on stderr).
"""

from __future__ import annotations

import csv
import json
import queue
import subprocess
import threading
import unicodedata
from typing import Callable, Protocol, Sequence


class MissingPrediction(KeyError):
    pass


class FallbackUnavailable(RuntimeError):
    pass


class Classifier(Protocol):
    name: str

    def classify_batch(self, texts: Sequence[str]) -> list[float]:
        """Scores in [0,1], one per input, order preserved."""


def normalize_sentence(text: str) -> str:
    """NFC-normalize and collapse runs of whitespace to single spaces."""
    return " ".join(unicodedata.normalize("NFC", text).split())


class FunctionClassifier:
    """Wraps a plain ``text -> score`` callable."""

    def __init__(self, fn: Callable[[str], float], name: str = "function"):
        self._fn = fn
        self.name = name

    def classify_batch(self, texts: Sequence[str]) -> list[float]:
        return [float(self._fn(t)) for t in texts]


class PredictionTableClassifier:
    """Answers from a precomputed sentence -> score table."""

    def __init__(self, table: dict[str, float], name: str = "predictions"):
        self._table = {normalize_sentence(k): float(v) for k, v in table.items()}
        self.name = name

    def classify_batch(self, texts: Sequence[str]) -> list[float]:
        out = []
        for text in texts:
            key = normalize_sentence(text)
            if key not in self._table:
                raise MissingPrediction(text)
            out.append(self._table[key])
        return out


def classifier_from_predictions(path: str, name: str | None = None) -> PredictionTableClassifier:
    """Load a ``sentence,score`` CSV into a table-backed classifier."""
    table: dict[str, float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "sentence" not in reader.fieldnames or "score" not in reader.fieldnames:
            raise ValueError(f"{path}: expected CSV header with 'sentence' and 'score' columns")
        for row in reader:
            score = float(row["score"])
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"{path}: score {score} outside [0,1]")
            table[row["sentence"]] = score
    return PredictionTableClassifier(table, name=name or path)


class SubprocessClassifier:
    """Classifier backed by a child process speaking the prediction protocol.

    The child is spawned lazily, reused across batches, and shut down with a
    quit message on close(). A background thread drains stdout so responses
    arriving out of order or interleaved with slow requests are still matched.
    Thread-safe: concurrent classify_batch calls are serialized.
    """

    def __init__(self, command: Sequence[str], timeout: float = 30.0, name: str | None = None):
        self.command = list(command)
        self.timeout = timeout
        self.name = name or " ".join(self.command)
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._next_id = 0
        self._lock = threading.Lock()

    def _ensure_started(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # child diagnostics pass through
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise FallbackUnavailable(f"could not spawn {self.command!r}: {exc}") from exc
        self._lines = queue.Queue()
        reader = threading.Thread(target=self._drain, args=(self._proc,), daemon=True)
        reader.start()

    def _drain(self, proc: subprocess.Popen) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF sentinel

    def classify_batch(self, texts: Sequence[str]) -> list[float]:
        with self._lock:
            if not texts:
                return []
            self._ensure_started()
            assert self._proc is not None and self._proc.stdin is not None
            ids = []
            try:
                for text in texts:
                    req_id = self._next_id
                    self._next_id += 1
                    ids.append(req_id)
                    self._proc.stdin.write(json.dumps({"id": req_id, "text": text}) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise FallbackUnavailable(f"child pipe failed: {exc}") from exc

            pending = set(ids)
            scores: dict[int, float] = {}
            while pending:
                try:
                    line = self._lines.get(timeout=self.timeout)
                except queue.Empty:
                    self._terminate()
                    raise FallbackUnavailable(
                        f"timed out after {self.timeout}s waiting for {len(pending)} responses"
                    ) from None
                if line is None:
                    self._terminate()
                    raise FallbackUnavailable("child closed stdout before answering all requests")
                line = line.strip()
                if not line:
                    continue
                try:
                    msg = json.loads(line)
                    resp_id = msg["id"]
                    score = float(msg["p_regulatory"])
                except (ValueError, KeyError, TypeError) as exc:
                    self._terminate()
                    raise FallbackUnavailable(f"protocol violation in line {line!r}: {exc}") from exc
                if resp_id not in pending:
                    self._terminate()
                    raise FallbackUnavailable(f"response for unknown id {resp_id!r}")
                if not 0.0 <= score <= 1.0:
                    self._terminate()
                    raise FallbackUnavailable(f"score {score} outside [0,1] for id {resp_id}")
                scores[resp_id] = score
                pending.discard(resp_id)
            return [scores[i] for i in ids]

    def _terminate(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def close(self) -> None:
        with self._lock:
            proc = self._proc
            if proc is None or proc.poll() is not None:
                self._proc = None
                return
            try:
                assert proc.stdin is not None
                proc.stdin.write(json.dumps({"cmd": "quit"}) + "\n")
                proc.stdin.flush()
                proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                proc.kill()
                proc.wait()
            self._proc = None

    def __enter__(self) -> "SubprocessClassifier":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def classifier_from_subprocess(
    command: Sequence[str], timeout: float = 30.0, name: str | None = None
) -> SubprocessClassifier:
    return SubprocessClassifier(command, timeout=timeout, name=name)
