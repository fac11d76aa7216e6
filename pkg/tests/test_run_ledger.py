"""Tests for the run ledger"""

import json

from src.infrastructure.run_ledger import RunLedger, summarize


class TestRunLedger:
    def test_initialization(self, tmp_path):
        ledger = RunLedger(output_dir=str(tmp_path / "out"))
        assert ledger.output_dir.exists()
        assert ledger.max_runs == 200
        assert ledger.load() == []

    def test_record_and_load(self, tmp_path):
        ledger = RunLedger(output_dir=str(tmp_path))
        record = ledger.record({"command": "measure", "exit_code": 0})

        runs = ledger.load()
        assert len(runs) == 1
        assert runs[0]["command"] == "measure"
        assert runs[0]["id"] == record["id"]
        assert "timestamp" in runs[0]

    def test_corrupt_file_reads_as_empty(self, tmp_path, capsys):
        (tmp_path / "runs.json").write_text("{not json", encoding="utf-8")
        assert RunLedger(output_dir=str(tmp_path)).load() == []
        assert "Failed to load run ledger" in capsys.readouterr().err

    def test_non_list_reads_as_empty(self, tmp_path):
        (tmp_path / "runs.json").write_text(json.dumps({"a": 1}), encoding="utf-8")
        assert RunLedger(output_dir=str(tmp_path)).load() == []

    def test_folding(self, tmp_path):
        ledger = RunLedger(output_dir=str(tmp_path), max_runs=4)
        for i in range(5):
            ledger.record({"command": "digits" if i < 3 else "clt", "seq": i})

        runs = ledger.load()
        assert [r["seq"] for r in runs] == [2, 3, 4]
        summary = ledger.load_summary()
        assert "Summary of 2 runs" in summary
        assert "Most common command: digits" in summary

    def test_empty_summary(self, tmp_path):
        assert RunLedger(output_dir=str(tmp_path)).load_summary() == "No earlier runs."


class TestSummarize:
    def test_empty(self):
        assert summarize([]) == "No earlier runs."

    def test_breakdown(self):
        runs = [
            {"command": "clt", "timestamp": "t0"},
            {"command": "clt", "timestamp": "t1"},
            {"timestamp": "t2"},
        ]
        text = summarize(runs)
        assert "(t0 to t2)" in text
        assert "{'clt': 2, 'unknown': 1}" in text
