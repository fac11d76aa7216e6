"""Tests for the mixing constants and the discrepancy analysis."""

import math

import pytest

from src.domain.errors import DomainError
from src.domain.mixing_lab import (
    A_HIGH,
    A_LOW,
    ETA,
    ETA_SIGNED,
    PSI1,
    RHO_PRIME,
    THETA,
    empirical_phi,
    empirical_psi1,
    eta_exact,
    eta_numeric,
    extremal_discrepancy,
    f_da,
    f_discrepancy,
    f_dx,
    f_zeros,
    interior_regime_bound,
    phi1_rectangle_scan,
    phi_bound,
    psi_bound,
    regime_table,
)


class TestConstants:
    def test_eta(self):
        assert ETA == pytest.approx(0.0860713, abs=1e-7)
        assert ETA_SIGNED < 0
        assert eta_exact() == ETA

    def test_psi1(self):
        assert PSI1 == pytest.approx(0.3862944, abs=1e-7)

    def test_regime_boundaries(self):
        assert A_LOW == pytest.approx(PSI1)
        assert A_LOW < A_HIGH < 1

    def test_psi_bounds(self):
        assert psi_bound(1) == PSI1
        assert psi_bound(2) == RHO_PRIME
        assert psi_bound(4) == pytest.approx(RHO_PRIME * THETA**2)

    def test_phi_bounds(self):
        assert phi_bound(1) == ETA
        assert phi_bound(3) == pytest.approx(psi_bound(3) / 2)

    @pytest.mark.parametrize("bound", [psi_bound, phi_bound])
    def test_lag_domain(self, bound):
        with pytest.raises(DomainError):
            bound(0)


class TestDiscrepancy:
    def test_vanishes_at_endpoints(self):
        for a in (0.0, 0.5, 1.0):
            assert f_discrepancy(a, 0.0) == 0.0
            assert f_discrepancy(a, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_scalar_domain(self):
        with pytest.raises(DomainError):
            f_discrepancy(1.5, 0.5)

    def test_increasing_in_a(self):
        assert f_da(0.3, 0.4) > 0
        assert f_discrepancy(0.6, 0.4) > f_discrepancy(0.3, 0.4)

    def test_zeros_interior_regime(self):
        x1, x2 = f_zeros(0.4)
        assert x1 == pytest.approx(0.8465, abs=1e-3)
        assert x2 == pytest.approx(0.2186, abs=1e-3)
        assert f_dx(0.4, x1) == pytest.approx(0.0, abs=1e-9)
        assert f_dx(0.4, x2) == pytest.approx(0.0, abs=1e-9)

    def test_zeros_at_a_zero(self):
        x1, x2 = f_zeros(0.0)
        assert x1 is None
        assert x2 == pytest.approx(1 / math.log(2) - 1)
        assert f_dx(0.0, x2) == pytest.approx(0.0, abs=1e-12)

    def test_small_a_branch_is_continuous(self):
        assert f_zeros(5e-7)[1] == pytest.approx(f_zeros(2e-6)[1], abs=1e-5)

    def test_zeros_at_a_one(self):
        x1, x2 = f_zeros(1.0)
        assert x2 is None
        assert f_dx(1.0, x1) == pytest.approx(0.0, abs=1e-9)


class TestRegimes:
    @pytest.mark.parametrize("a,regime", [(0.1, "a"), (0.4, "b"), (0.9, "c")])
    def test_regime_labels(self, a, regime):
        assert extremal_discrepancy(a).regime == regime

    def test_a_zero_attains_eta(self):
        profile = extremal_discrepancy(0.0)
        assert profile.minimum == pytest.approx(ETA_SIGNED, rel=1e-12)

    def test_a_one_attains_eta(self):
        assert extremal_discrepancy(1.0).magnitude == pytest.approx(ETA, rel=1e-9)

    def test_negative_set_complements_positive_set(self):
        profile = extremal_discrepancy(0.4)
        (lo, hi), = profile.positive_set
        assert profile.negative_set == [(0.0, lo), (hi, 1.0)]

    def test_interior_bound(self):
        value = interior_regime_bound()
        assert -0.0118 <= value < 0

    def test_table_never_exceeds_eta(self):
        table = regime_table(101)
        assert len(table) == 101
        assert all(p.magnitude <= ETA + 1e-12 for p in table)
        assert max(p.magnitude for p in table) == pytest.approx(ETA, rel=1e-9)

    def test_to_dict(self):
        d = extremal_discrepancy(0.9).to_dict()
        assert d["regime"] == "c"
        assert d["x2"] is None


class TestNumericChecks:
    def test_eta_numeric_smallest_grid(self):
        value, a_star = eta_numeric(grid_a=1000, grid_x=1000)
        assert abs(value - ETA) < 1e-4
        assert value <= ETA + 1e-12
        assert a_star < 0.05 or a_star > 0.95

    @pytest.mark.parametrize("grid_a,grid_x", [(999, 2001), (2001, 10)])
    def test_eta_numeric_grid_domain(self, grid_a, grid_x):
        with pytest.raises(DomainError):
            eta_numeric(grid_a=grid_a, grid_x=grid_x)

    def test_empirical_psi1_is_a_lower_bound(self):
        value = empirical_psi1(20)
        assert 0 < value <= PSI1 + 1e-9

    def test_exact_phi1(self):
        est = empirical_phi(1, K=10)
        assert est.exact
        assert 0 < est.value <= ETA + 1e-9
        assert est.argmax.startswith("C={a_1")

    def test_monte_carlo_phi2(self):
        est = empirical_phi(2, K=3, trials=20_000, seed=1)
        assert not est.exact
        assert est.value <= phi_bound(2) + 5 * est.standard_error

    def test_rectangle_scan_approaches_eta(self):
        value, x, _ = phi1_rectangle_scan(200)
        assert ETA - 0.01 < value <= ETA + 1e-9
        assert x == pytest.approx(1 / 200)
