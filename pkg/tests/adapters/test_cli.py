"""End-to-end tests for the command-line front-end."""

import io
import json
from pathlib import Path

import pytest

from src.adapters.cli import main
from src.adapters.cli.app import EXIT_BAD_INPUT, EXIT_OK, EXIT_REFUSED, EXIT_SELF_CHECK, build_parser
from src.config import AppConfig, SamplerConfig

EXPERIMENTS = Path(__file__).resolve().parents[2] / "experiments"


def run(tmp_path, *argv):
    out = io.StringIO()
    argv = list(argv)
    code = main(argv[:1] + ["--output-dir", str(tmp_path)] + argv[1:], out=out)
    return code, out.getvalue().splitlines()


class TestParser:
    def test_subcommands(self):
        args = build_parser().parse_args(["clt", "--preset", "threshold-2", "--threads", "4"])
        assert args.command == "clt"
        assert args.workers == 4

    def test_unknown_command(self, tmp_path):
        assert main(["bogus"]) == EXIT_BAD_INPUT

    def test_missing_command(self):
        assert main([]) == EXIT_BAD_INPUT


class TestDigits:
    def test_rational(self, tmp_path):
        code, lines = run(tmp_path, "digits", "--frac", "113/355")
        assert code == EXIT_OK
        assert lines[0] == "3 7 16"
        assert lines[2].split("\t") == ["n", "a_n", "p_n", "q_n", "r_n", "y_n", "u_n", "reliable"]
        assert lines[5].split("\t")[:4] == ["3", "16", "113", "355"]

    def test_half(self, tmp_path):
        code, lines = run(tmp_path, "digits", "--frac", "1/2")
        assert code == EXIT_OK
        assert lines[0] == "2"

    def test_real(self, tmp_path):
        code, lines = run(tmp_path, "digits", "--real", "0.41421356", "--n", "5")
        assert code == EXIT_OK
        assert lines[0] == "2 2 2 2 2"

    def test_real_with_precision(self, tmp_path):
        code, lines = run(
            tmp_path, "digits", "--real", "0.41421356237309504880168872420969807856967187537694",
            "--n", "30", "--precision-bits", "200",
        )
        assert code == EXIT_OK
        assert lines[0].split()[:25] == ["2"] * 25

    def test_csv_output(self, tmp_path):
        code, _ = run(tmp_path, "digits", "--frac", "113/355", "--output", "d.csv", "--format", "csv")
        assert code == EXIT_OK
        assert (tmp_path / "d.csv").read_text().splitlines()[1].startswith("n,a_n,p_n")

    def test_band_hits(self, tmp_path):
        # u_1 = 355/113, u_2 = 1065/144, u_3 = 7810/484 against the band (3, 8]
        code, lines = run(
            tmp_path, "digits", "--frac", "113/355", "--kind", "closed_band", "--c", "1", "--d", "3",
            "--band-var", "u", "--output", "d.json",
        )
        assert code == EXIT_OK
        assert lines[-1] == "band hits (u_n): 1 2"
        result = json.loads((tmp_path / "d.json").read_text())
        assert result["band_hits"] == {"variable": "u", "indices": [1, 2]}

    @pytest.mark.parametrize("family", [[], ["--kind", "threshold", "--b", "2"]])
    def test_band_hits_need_a_band_family(self, tmp_path, family):
        code, _ = run(tmp_path, "digits", "--frac", "113/355", "--band-var", "u", *family)
        assert code == EXIT_BAD_INPUT

    @pytest.mark.parametrize(
        "argv",
        [
            ["digits"],
            ["digits", "--frac", "1/2", "--real", "0.5"],
            ["digits", "--frac", "3/2"],
            ["digits", "--frac", "abc"],
            ["digits", "--real", "1.5"],
        ],
    )
    def test_bad_input(self, tmp_path, argv):
        code, _ = run(tmp_path, *argv)
        assert code == EXIT_BAD_INPUT


class TestMeasure:
    def test_threshold_two(self, tmp_path):
        code, lines = run(tmp_path, "measure", "--kind", "threshold", "--b", "2", "--n-to", "3")
        assert code == EXIT_OK
        assert lines[1] == "1\t[2, inf]\t0.5849625007"
        assert len(lines) == 4

    def test_manifest(self, tmp_path):
        code, _ = run(tmp_path, "measure", "--config", str(EXPERIMENTS / "measure-threshold-2.json"))
        assert code == EXIT_OK
        rows = (tmp_path / "measure-threshold-2.csv").read_text().splitlines()
        assert rows[1] == "n,lo,hi,measure"
        assert len(rows) == 12

    def test_flags_override_manifest(self, tmp_path):
        code, lines = run(
            tmp_path, "measure", "--config", str(EXPERIMENTS / "measure-threshold-2.json"), "--b", "3",
        )
        assert code == EXIT_OK
        assert lines[1].startswith("1\t[3, inf]")

    def test_needs_family(self, tmp_path):
        assert run(tmp_path, "measure")[0] == EXIT_BAD_INPUT

    def test_missing_sequence(self, tmp_path):
        assert run(tmp_path, "measure", "--kind", "threshold")[0] == EXIT_BAD_INPUT

    def test_manifest_for_other_command(self, tmp_path):
        code, _ = run(tmp_path, "clt", "--config", str(EXPERIMENTS / "measure-threshold-2.json"))
        assert code == EXIT_BAD_INPUT

    def test_missing_manifest(self, tmp_path):
        assert run(tmp_path, "measure", "--config", str(tmp_path / "nope.json"))[0] == EXIT_BAD_INPUT


class TestSample:
    def test_text_stdout(self, tmp_path):
        code, lines = run(tmp_path, "sample", "--n", "5", "--trials", "3", "--mode", "mixture", "--seed", "1")
        assert code == EXIT_OK
        assert len(lines) == 15
        assert all(int(v) >= 1 for v in lines)

    def test_worker_count_does_not_change_output(self, tmp_path):
        args = ["sample", "--n", "20", "--trials", "24", "--mode", "exact", "--seed", "9", "--stream-format", "binary"]
        assert run(tmp_path / "one", *args, "--output", "s.bin", "--threads", "1")[0] == EXIT_OK
        assert run(tmp_path / "two", *args, "--output", "s.bin", "--threads", "2")[0] == EXIT_OK
        one = (tmp_path / "one" / "s.bin").read_bytes()
        assert one == (tmp_path / "two" / "s.bin").read_bytes()
        assert int.from_bytes(one[:8], "little") == 24 * 20

    def test_binary_needs_a_byte_sink(self, tmp_path):
        code, _ = run(tmp_path, "sample", "--n", "3", "--stream-format", "binary")
        assert code == EXIT_BAD_INPUT

    def test_bad_seed(self, tmp_path):
        assert run(tmp_path, "sample", "--seed", "-1")[0] == EXIT_BAD_INPUT


class TestZeroOne:
    @pytest.mark.parametrize(
        "preset,verdict",
        [
            ("sqrt-nlogn-equal", "AS_INFINITELY_OFTEN"),
            ("sqrtn-logn-equal", "AS_FINITELY_OFTEN"),
            ("threshold-nlog2n", "AS_FINITELY_OFTEN"),
        ],
    )
    def test_presets(self, tmp_path, preset, verdict):
        code, lines = run(tmp_path, "zero-one", "--preset", preset, "--horizon", "2000")
        assert code == EXIT_OK
        assert lines[0] == verdict
        payload = json.loads((tmp_path / "zero-one.json").read_text())
        assert payload["verdict"]["verdict"] == verdict
        assert payload["chandra"]["psi"]["certified"] is True

    def test_inconclusive_still_succeeds(self, tmp_path):
        code, lines = run(tmp_path, "zero-one", "--kind", "equal", "--d", "n", "--horizon", "1000")
        assert code == EXIT_OK
        assert lines[0] == "INCONCLUSIVE"

    def test_limsup_writes_growth_table(self, tmp_path):
        code, _ = run(
            tmp_path, "zero-one", "--preset", "threshold-n", "--horizon", "1000",
            "--limsup", "--horizons", "100", "1000", "--trials", "30", "--output", "z.json",
        )
        assert code == EXIT_OK
        rows = (tmp_path / "z.growth.csv").read_text().splitlines()
        assert rows[1].startswith("horizon,mean")
        assert len(rows) == 4

    def test_limsup_needs_trials(self, tmp_path):
        code, _ = run(tmp_path, "zero-one", "--preset", "threshold-n", "--horizon", "1000", "--limsup")
        assert code == EXIT_BAD_INPUT

    def test_short_horizon(self, tmp_path):
        assert run(tmp_path, "zero-one", "--preset", "threshold-n", "--horizon", "500")[0] == EXIT_BAD_INPUT


class TestClt:
    def test_refused(self, tmp_path):
        code, lines = run(tmp_path, "clt", "--config", str(EXPERIMENTS / "clt-refused.json"), "--n", "100")
        assert code == EXIT_REFUSED
        assert lines[0].startswith("rho = 0.6834")
        assert not (tmp_path / "clt.json").exists()

    def test_threshold_two(self, tmp_path):
        code, lines = run(
            tmp_path, "clt", "--kind", "threshold", "--b", "2", "--n", "100",
            "--trials", "1000", "--mode", "mixture", "--seed", "5",
        )
        assert code == EXIT_OK
        assert lines[0].startswith("rho = 0.6834")
        result = json.loads((tmp_path / "clt.json").read_text())
        assert result["trials"] == 1000
        assert result["conditions"]["threshold_ok"] is True
        assert (tmp_path / "clt.ecdf.csv").read_text().splitlines()[1] == "z,ecdf"

    def test_too_few_trials(self, tmp_path):
        code, _ = run(tmp_path, "clt", "--kind", "threshold", "--b", "2", "--n", "100", "--trials", "10")
        assert code == EXIT_BAD_INPUT

    def test_corollary_case(self, tmp_path):
        code, _ = run(
            tmp_path, "clt", "--case", "A", "--n", "100", "--trials", "1000", "--mode", "mixture", "--seed", "5",
        )
        assert code == EXIT_OK
        result = json.loads((tmp_path / "clt.json").read_text())
        assert result["conditions"]["divergence_ok"] is True

    def test_case_and_family_conflict(self, tmp_path):
        code, _ = run(tmp_path, "clt", "--case", "A", "--preset", "threshold-2", "--trials", "1000")
        assert code == EXIT_BAD_INPUT

    def test_samples_csv(self, tmp_path):
        code, _ = run(
            tmp_path, "clt", "--kind", "threshold", "--b", "2", "--n", "50",
            "--trials", "1000", "--mode", "mixture", "--samples-csv",
        )
        assert code == EXIT_OK
        lines = (tmp_path / "clt.samples.csv").read_text().splitlines()
        assert lines[1] == "trajectory,z"
        assert len(lines) == 1002
        assert lines[2].startswith("0,")

    def test_exact_cap_from_environment(self, tmp_path, monkeypatch):
        capped = AppConfig(sampler=SamplerConfig(exact_cap=50))
        monkeypatch.setattr(AppConfig, "from_env", classmethod(lambda cls: capped))
        code, _ = run(tmp_path, "clt", "--kind", "threshold", "--b", "2", "--n", "100", "--trials", "1000")
        assert code == EXIT_BAD_INPUT
        code, _ = run(
            tmp_path, "zero-one", "--preset", "threshold-2", "--horizon", "1000", "--limsup",
            "--horizons", "100", "--trials", "30", "--mode", "exact",
        )
        assert code == EXIT_BAD_INPUT


class TestMixing:
    def test_default_grid_passes_self_check(self, tmp_path):
        code, lines = run(tmp_path, "mixing")
        assert code == EXIT_OK
        assert lines[0] == "eta 0.0860713"
        assert lines[2] == "psi1 0.3862944"
        assert (tmp_path / "mixing.profile.csv").exists()

    def test_numeric_mismatch_fails_self_check(self, tmp_path, monkeypatch):
        monkeypatch.setattr("src.adapters.cli.app.eta_numeric", lambda grid_a, grid_x: (0.085, 0.0))
        code, _ = run(tmp_path, "mixing", "--profile-points", "5")
        assert code == EXIT_SELF_CHECK
        assert (tmp_path / "mixing.json").exists()

    def test_grid_below_minimum(self, tmp_path):
        assert run(tmp_path, "mixing", "--grid-a", "10")[0] == EXIT_BAD_INPUT


class TestReproducibility:
    def test_rerun_is_byte_identical(self, tmp_path):
        args = [
            "zero-one", "--preset", "threshold-n", "--horizon", "1000", "--limsup",
            "--horizons", "100", "--trials", "30", "--seed", "3",
        ]
        assert run(tmp_path / "a", *args)[0] == EXIT_OK
        assert run(tmp_path / "b", *args)[0] == EXIT_OK
        for name in ("zero-one.json", "zero-one.growth.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_meta_side_file(self, tmp_path):
        run(tmp_path, "measure", "--kind", "threshold", "--b", "2", "--output", "m.json", "--seed", "4")
        meta = json.loads((tmp_path / "m.json.meta.json").read_text())
        assert meta["command"] == "measure"
        assert meta["config"]["seed"] == 4
        assert len(meta["config_digest"]) == 16

    def test_ledger_records_every_run(self, tmp_path):
        run(tmp_path, "digits", "--frac", "1/2")
        run(tmp_path, "digits")
        runs = json.loads((tmp_path / "runs.json").read_text())
        assert [r["exit_code"] for r in runs] == [EXIT_OK, EXIT_BAD_INPUT]
