import csv
import json
import shlex
import sys

import pytest

from lexrule import metrics, ruleclf
from lexrule.cli import run

from conftest import FIXTURES


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def stub(name, *args):
    return " ".join(shlex.quote(p) for p in [sys.executable, str(FIXTURES / name), *args])


class TestExtractAndSentences:
    def test_pipeline_matches_direct_calls(self, tmp_path):
        sections = tmp_path / "sections"
        out_csv = tmp_path / "candidates.csv"
        assert run(["extract", "--docs", str(FIXTURES / "docs"), "--out", str(sections)]) == 0
        assert run(["sentences", "--sections", str(sections), "--out", str(out_csv)]) == 0
        rows = read_csv(out_csv)
        assert len(rows) == 8  # hand-counted candidates in the fixture act
        assert all(row["doc_id"] == "32016R2031" for row in rows)

        from lexrule import corpus
        from lexrule.cli import DATA_DIR

        markers = corpus.load_markers(str(DATA_DIR / "markers.txt"))
        abbrevs = corpus.load_phrase_file(str(DATA_DIR / "abbreviations.txt"))
        section = (sections / "32016R2031.txt").read_text(encoding="utf-8")
        direct = corpus.filter_deontic(
            corpus.segment_sentences(section, abbreviations=abbrevs), doc_id="32016R2031"
        )
        assert [(r["text"], int(r["index_in_doc"])) for r in rows] == [
            (c.text, c.index_in_doc) for c in direct
        ]

    def test_extract_failure_exit_code(self, tmp_path):
        docs = tmp_path / "docs"
        docs.mkdir()
        (docs / "bad.txt").write_text("no markers at all")
        assert run(["extract", "--docs", str(docs), "--out", str(tmp_path / "o")]) == 1


class TestSample:
    def _write_inputs(self, tmp_path):
        cands = tmp_path / "cands.csv"
        with open(cands, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["doc_id", "index_in_doc", "text"])
            for doc in ("d1", "d2"):
                for i in range(10):
                    writer.writerow([doc, i, f"sentence {doc}-{i} shall apply"])
        meta = tmp_path / "meta.csv"
        with open(meta, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["celex_id", "adoption_year", "policy_area", "legal_form"])
            writer.writerow(["d1", 2001, "03", "regulation"])
            writer.writerow(["d2", 2002, "05", "directive"])
        return cands, meta

    def test_deterministic_across_runs(self, tmp_path):
        cands, meta = self._write_inputs(tmp_path)
        out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        args = ["sample", "--candidates", str(cands), "--metadata", str(meta),
                "--per-stratum", "7", "--seed", "42"]
        assert run(args + ["--out", str(out1)]) == 0
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert len(read_csv(out1)) == 14

    def test_seed_is_mandatory(self, tmp_path):
        cands, meta = self._write_inputs(tmp_path)
        code = run(["sample", "--candidates", str(cands), "--metadata", str(meta),
                    "--per-stratum", "7", "--out", str(tmp_path / "x.csv")])
        assert code == 2


class TestClassify:
    def test_outcomes_match_direct_module_calls(self, tmp_path, agent_lexicon, parsed_sentences):
        out = tmp_path / "preds.csv"
        code = run([
            "classify", "--conllu", str(FIXTURES / "eu_sentences.conllu"),
            "--deprel-scheme", "legacy_clear", "--profile", "v1", "--out", str(out),
        ])
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == len(parsed_sentences)
        for row in rows:
            direct = ruleclf.classify_rule(
                parsed_sentences[row["sentence"]], agent_lexicon, ruleclf.RuleProfile("v1")
            )
            assert int(row["label"]) == (1 if direct.label == ruleclf.REGULATORY else 0)
            assert float(row["score"]) == direct.score
            want_reason = direct.rationale.failure_reason.value if direct.rationale.failure_reason else ""
            assert row["failure_reason"] == want_reason
            assert row["attribute_phrase"] == (direct.rationale.attribute_phrase or "")

    def test_hybrid_with_stub_fallback(self, tmp_path):
        out = tmp_path / "hybrid.csv"
        code = run([
            "classify", "--conllu", str(FIXTURES / "eu_sentences.conllu"),
            "--deprel-scheme", "legacy_clear", "--out", str(out),
            "--hybrid", "--fallback-cmd", stub("stub_constant_child.py", "1.0"),
        ])
        assert code == 0
        rows = {r["sentence"]: r for r in read_csv(out)}
        assert rows["It shall inform the Council of any difficulties."]["label"] == "1"
        assert rows["The data exchange shall comply with the FLUX Vessel Position Implementation Document adopted by NEAFC."]["label"] == "0"

    def test_custom_lexicon_via_env(self, tmp_path, monkeypatch):
        empty_lex = tmp_path / "empty.txt"
        empty_lex.write_text("nothingagentive\n")
        monkeypatch.setenv("LEXRULE_LEXICON", str(empty_lex))
        out = tmp_path / "preds.csv"
        assert run([
            "classify", "--conllu", str(FIXTURES / "eu_sentences.conllu"),
            "--deprel-scheme", "legacy_clear", "--out", str(out),
        ]) == 0
        rows = {r["sentence"]: r for r in read_csv(out)}
        # lexicon-based win disappears, proper-noun win survives
        assert rows["Citizens must separate their recyclables."]["label"] == "0"
        assert rows["The Commission shall adopt implementing acts laying down the format of the notification."]["label"] == "1"

    def test_missing_conllu_is_usage_error(self, tmp_path):
        assert run(["classify", "--conllu", str(tmp_path / "nope.conllu"), "--out", "x.csv"]) == 2


class TestEvaluate:
    def test_report_matches_module_metrics(self, tmp_path, capsys, gold_rows):
        preds = tmp_path / "preds.csv"
        run([
            "classify", "--conllu", str(FIXTURES / "eu_sentences.conllu"),
            "--deprel-scheme", "legacy_clear", "--out", str(preds),
        ])
        json_out = tmp_path / "report.json"
        code = run([
            "evaluate", "--gold", str(FIXTURES / "eu_sentences_gold.csv"),
            "--pred", f"rules={preds}", "--pred", f"external={FIXTURES / 'external_predictions.csv'}",
            "--out-json", str(json_out),
        ])
        assert code == 0
        table = capsys.readouterr().out
        assert "rules" in table and "external" in table

        payload = json.loads(json_out.read_text())
        gold = [label for _, label in gold_rows]
        with open(preds, newline="", encoding="utf-8") as fh:
            by_sentence = {r["sentence"]: int(r["label"]) for r in csv.DictReader(fh)}
        pred_labels = [by_sentence[s] for s, _ in gold_rows]
        direct = metrics.per_class_metrics(metrics.confusion(gold, pred_labels))
        assert payload["models"]["rules"]["accuracy"] == pytest.approx(direct.accuracy)
        assert payload["models"]["rules"]["regulatory"]["precision"] == pytest.approx(
            direct.regulatory.precision
        )

    def test_missing_prediction_is_data_error(self, tmp_path):
        preds = tmp_path / "partial.csv"
        preds.write_text('sentence,score\n"Citizens must separate their recyclables.",1.0\n')
        code = run([
            "evaluate", "--gold", str(FIXTURES / "eu_sentences_gold.csv"),
            "--pred", f"partial={preds}",
        ])
        assert code == 1


class TestExplainCommand:
    def test_explain_outputs(self, tmp_path):
        out_dir = tmp_path / "xai"
        subset = tmp_path / "subset.csv"
        with open(FIXTURES / "xai_sample.csv", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        with open(subset, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sentence", "label"])
            for row in rows[:3] + rows[8:10]:
                writer.writerow([row["sentence"], row["label"]])
        code = run([
            "explain", "--sentences", str(subset), "--cmd", stub("stub_keyword_child.py"),
            "--seed", "7", "--n-samples", "64", "--min-freq", "1", "--out-dir", str(out_dir),
        ])
        assert code == 0
        lines = (out_dir / "explanations.jsonl").read_text().splitlines()
        assert len(lines) == 5
        for line in lines:
            payload = json.loads(line)
            assert len(payload["tokens"]) == len(payload["attributions"])
        words = read_csv(out_dir / "influential_words.csv")
        assert {"token", "class", "frequency"} == set(words[0])
        stats = read_csv(out_dir / "position_stats.csv")
        assert {"class", "stat", "position_pct", "sent_chars"} == set(stats[0])

    def test_seed_required(self, tmp_path):
        code = run([
            "explain", "--sentences", str(FIXTURES / "xai_sample.csv"),
            "--cmd", "true", "--out-dir", str(tmp_path),
        ])
        assert code == 2


class TestUsage:
    def test_unknown_subcommand(self):
        assert run(["frobnicate"]) == 2

    def test_no_subcommand(self):
        assert run([]) == 2

    def test_help_exits_zero(self):
        assert run(["--help"]) == 0
