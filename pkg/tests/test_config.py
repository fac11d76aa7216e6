"""Tests for the typed configuration dataclasses."""

from src.config import CONFIG, AppConfig, RunConfig, SamplerConfig, _env_float, _env_int


class TestSamplerConfig:
    def test_defaults(self):
        c = SamplerConfig()
        assert c.exact_cap == 200_000
        assert c.float_base_bits == 64
        assert not hasattr(c, "burn_in")

    def test_float_precision_grows_with_n(self):
        c = SamplerConfig(float_base_bits=64, float_bits_per_digit=5)
        assert c.float_precision(0) == 64
        assert c.float_precision(100) == 564


class TestRunConfig:
    def test_defaults(self):
        c = RunConfig()
        assert c.output_dir == "results"
        assert c.workers == 1
        assert c.epsilon == 0.01


class TestAppConfig:
    def test_defaults(self):
        c = AppConfig()
        assert isinstance(c.sampler, SamplerConfig)
        assert isinstance(c.run, RunConfig)

    def test_from_env_mirrors_config(self):
        c = AppConfig.from_env()
        assert c.run.seed == CONFIG["seed"]
        assert c.run.workers == CONFIG["workers"]
        assert c.sampler.exact_cap == CONFIG["exact_cap"]

    def test_custom(self):
        c = AppConfig(run=RunConfig(workers=4, seed=7))
        assert c.run.workers == 4
        assert c.sampler.float_base_bits == 64


class TestEnvParsing:
    def test_int_unset(self, monkeypatch):
        monkeypatch.delenv("CF_LAB_TEST_INT", raising=False)
        assert _env_int("CF_LAB_TEST_INT", 5) == 5

    def test_int_valid(self, monkeypatch):
        monkeypatch.setenv("CF_LAB_TEST_INT", " 12 ")
        assert _env_int("CF_LAB_TEST_INT", 5) == 12

    def test_int_invalid_falls_back(self, monkeypatch, capsys):
        monkeypatch.setenv("CF_LAB_TEST_INT", "many")
        assert _env_int("CF_LAB_TEST_INT", 5) == 5
        assert "Invalid CF_LAB_TEST_INT" in capsys.readouterr().err

    def test_int_below_minimum(self, monkeypatch):
        monkeypatch.setenv("CF_LAB_TEST_INT", "0")
        assert _env_int("CF_LAB_TEST_INT", 3, minimum=1) == 3

    def test_float(self, monkeypatch):
        monkeypatch.setenv("CF_LAB_TEST_FLOAT", "0.05")
        assert _env_float("CF_LAB_TEST_FLOAT", 0.01) == 0.05

    def test_float_must_be_positive(self, monkeypatch):
        monkeypatch.setenv("CF_LAB_TEST_FLOAT", "-1")
        assert _env_float("CF_LAB_TEST_FLOAT", 0.01) == 0.01
