"""Tests for 0-1 law verdicts, empirical hits and the limsup study."""

import math

import numpy as np
import pytest

from src.config import SamplerConfig
from src.domain.errors import DomainError
from src.domain.events import closed_band, equal, open_band, threshold
from src.domain.mixing_lab import MIXING_CONSTANTS
from src.domain.zero_one import (
    ZERO_ONE_PRESETS,
    PowerLogSeries,
    SeriesMethod,
    VerdictKind,
    chandra_certificate,
    criterion_series,
    empirical_hits,
    horizon_ladder,
    limsup_study,
    lookup_preset,
    preset_family,
    series_verdict,
)


class _SerialRunner:
    def __init__(self):
        self.calls = 0

    def map(self, fn, items):
        self.calls += 1
        return [fn(item) for item in items]


class TestCriterionSeries:
    def test_threshold(self):
        s = criterion_series(threshold("n"))
        assert s.term(4) == pytest.approx(0.25)
        assert s.description == "sum 1/b_n"

    def test_threshold_restricted_for_clt(self):
        s = criterion_series(threshold("n"), clt_variant=True)
        assert s.term(1) == 0.0
        assert s.term(2) == pytest.approx(0.5)
        assert s.restriction == "b_n > 1"

    def test_equal(self):
        assert criterion_series(equal("n")).term(5) == pytest.approx(1 / 25)

    def test_closed_band_uses_both_series(self):
        s = criterion_series(closed_band(c="2", d="n"))
        assert s.term(4) == pytest.approx(1 / 8 + 1 / 16)

    def test_open_band_restriction(self):
        s = criterion_series(open_band(c="n", d="3"))
        assert s.term(2) == pytest.approx(1 / 6)
        assert s.term(4) == 0.0
        assert s.restriction == "c_n <= d_n"

    def test_zero_below_n0(self):
        assert criterion_series(threshold("n", n0=5)).term(3) == 0.0

    def test_terms_vector(self):
        assert criterion_series(threshold("n")).terms(3).tolist() == pytest.approx([1, 0.5, 1 / 3])


class TestPowerLogSeries:
    def test_divergence_classes(self):
        assert PowerLogSeries(1, 0).diverges
        assert PowerLogSeries(1, 1).diverges
        assert not PowerLogSeries(1, 2).diverges
        assert not PowerLogSeries(1.5, 0).diverges

    def test_tail_bound(self):
        assert PowerLogSeries(1, 2, role="upper").tail_bound(100) == pytest.approx(1 / math.log(100))
        assert PowerLogSeries(1, 1).tail_bound(100) == math.inf

    def test_threshold_index_for_nlogn(self):
        idx = PowerLogSeries(1, 1, n1=2).log10_threshold_index(50.0)
        assert idx == pytest.approx(math.log(2) * math.exp(50) / math.log(10))

    def test_verify_catches_violation(self):
        terms = np.array([1.0, 0.5, 0.1, 0.25])
        ok, bad = PowerLogSeries(1, 0, n1=1).verify(terms, 1, 4)
        assert not ok
        assert bad == 3


class TestPresets:
    def test_unknown_preset(self):
        with pytest.raises(DomainError):
            preset_family("no-such-family")

    def test_lookup_ignores_whitespace(self):
        fam = equal("floor( sqrt(n * log(n)) )", n0=2)
        assert lookup_preset(fam).name == "sqrt-nlogn-equal"

    def test_lookup_miss(self):
        assert lookup_preset(equal("n")) is None

    @pytest.mark.parametrize("name", sorted(ZERO_ONE_PRESETS))
    def test_every_preset_reaches_its_verdict(self, name):
        verdict = series_verdict(preset_family(name), horizon=2000)
        assert verdict.kind is ZERO_ONE_PRESETS[name].expected


class TestSeriesVerdict:
    def test_sqrt_nlogn_equal_diverges(self):
        v = series_verdict(preset_family("sqrt-nlogn-equal"), horizon=10_000)
        assert v.kind is VerdictKind.AS_INFINITELY_OFTEN
        # the comparison sum only passes 50 astronomically far out
        assert v.log10_divergence_index > 1e20

    def test_sqrtn_logn_equal_converges(self):
        v = series_verdict(preset_family("sqrtn-logn-equal"), horizon=10_000)
        assert v.kind is VerdictKind.AS_FINITELY_OFTEN
        assert v.tail_bound is not None
        assert v.tail_bound >= v.partial_sums[10_000]

    def test_partial_sums_cannot_certify_convergence(self):
        v = series_verdict(preset_family("sqrtn-logn-equal"), horizon=1000, method=SeriesMethod.PARTIAL_SUM)
        assert v.kind is VerdictKind.INCONCLUSIVE

    def test_constant_threshold(self):
        v = series_verdict(threshold("2"), horizon=1000)
        assert v.kind is VerdictKind.AS_INFINITELY_OFTEN
        assert v.test == "constant"

    def test_constant_empty_band(self):
        v = series_verdict(open_band(c="3", d="2"), horizon=1000)
        assert v.kind is VerdictKind.AS_FINITELY_OFTEN
        assert v.test == "empty"

    def test_unregistered_family_is_inconclusive(self):
        v = series_verdict(equal("n"), horizon=1000)
        assert v.kind is VerdictKind.INCONCLUSIVE
        assert v.partial_sums[1000] == pytest.approx(math.pi**2 / 6, abs=2e-3)

    def test_horizon_minimum(self):
        with pytest.raises(DomainError):
            series_verdict(threshold("2"), horizon=999)

    def test_ladder(self):
        assert horizon_ladder(5000) == [10, 100, 1000, 5000]

    def test_to_dict(self):
        d = series_verdict(threshold("2"), horizon=1000).to_dict()
        assert d["verdict"] == "AS_INFINITELY_OFTEN"
        assert "1000" in d["partial_sums"]


class TestEmpiricalHits:
    def test_hits_and_counts(self):
        report = empirical_hits([1, 2, 3, 1, 5], threshold("2"), 5, ladder=[2, 5])
        assert report.hit_times == [2, 3, 5]
        assert report.counts == {2: 1, 5: 3}

    def test_band(self):
        report = empirical_hits([4, 5, 7, 6], closed_band(c="2", d="4"), 4)
        assert report.hit_times == [1, 2, 4]

    def test_stream_too_short(self):
        with pytest.raises(DomainError):
            empirical_hits([1, 2], threshold("2"), 5)


class TestLimsupStudy:
    def test_mean_matches_exact(self):
        study = limsup_study(threshold("2"), [10, 50], trials=200, seed=1)
        assert [r.horizon for r in study.rows] == [10, 50]
        for row in study.rows:
            assert abs(row.mean - row.exact_mean) <= 5 * row.standard_error
        assert study.rows[1].exact_mean == pytest.approx(50 * math.log2(1.5))

    def test_growth_for_divergent_equality(self):
        study = limsup_study(preset_family("sqrt-nlogn-equal"), [1000, 10_000], trials=100, seed=2)
        assert study.rows[1].mean > study.rows[0].mean
        assert study.counts.shape == (100, 2)

    def test_runner_gives_same_counts(self):
        runner = _SerialRunner()
        a = limsup_study(threshold("3"), [20], trials=60, seed=5, runner=runner, chunk=7)
        b = limsup_study(threshold("3"), [20], trials=60, seed=5)
        assert runner.calls == 1
        assert np.array_equal(a.counts, b.counts)

    def test_minimum_trials(self):
        with pytest.raises(DomainError):
            limsup_study(threshold("2"), [10], trials=29, seed=1)

    def test_sampler_config_reaches_the_chain(self):
        with pytest.raises(DomainError):
            limsup_study(threshold("2"), [20], trials=30, seed=1, mode="exact", config=SamplerConfig(exact_cap=10))

    def test_to_dict_omits_raw_counts(self):
        d = limsup_study(threshold("2"), [10], trials=30, seed=1).to_dict()
        assert "counts" not in d
        assert d["mode"] == "mixture"


class TestChandraCertificate:
    def test_psi_total(self):
        c = MIXING_CONSTANTS
        cert = chandra_certificate(threshold("2"))
        assert cert.certified
        assert cert.total == pytest.approx(c.psi1 + c.rho_prime / (1 - c.theta), rel=1e-12)
        assert abs(cert.total - 0.5875958) < 5e-5

    def test_phi_variant(self):
        c = MIXING_CONSTANTS
        cert = chandra_certificate(threshold("2"), mixing="phi")
        assert cert.total == pytest.approx(c.eta + c.rho_prime / (2 * (1 - c.theta)))
        assert cert.weights[0] == pytest.approx(c.eta)

    def test_weights_decrease_after_lag_two(self):
        cert = chandra_certificate(threshold("2"), terms=10)
        assert cert.monotone_from_2
        assert len(cert.weights) == 10

    def test_unknown_mixing(self):
        with pytest.raises(DomainError):
            chandra_certificate(threshold("2"), mixing="alpha")
