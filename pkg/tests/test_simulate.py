"""Unit tests for path generation and the calibration noise device."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from rcatest.errors import ParameterError
from rcatest.simulate import (
    InnovationSpec,
    RcaParams,
    Series,
    eta_replacement,
    gen_innovations,
    replaced_z2,
    simulate_rca,
)


class TestInnovationSpec:
    def test_normal_defaults(self):
        spec = InnovationSpec("normal")
        assert spec.sigma_eps2 == 1.0
        assert spec.sigma_eta2 == 2.0
        assert spec.psi == 0.0
        assert spec.eps_eta_ratio == pytest.approx(2**-0.5)

    def test_chisq_moments(self):
        # Var(eps**2 - 1) = 2 + 12/df for a standardized chi-square.
        assert InnovationSpec("chisq", df=1).sigma_eta2 == pytest.approx(14.0)
        assert InnovationSpec("chisq", df=10).sigma_eta2 == pytest.approx(3.2)
        # Corr(eps, eps**2 - 1) = sqrt(8/df) / sqrt(12/df + 2).
        assert InnovationSpec("chisq", df=1).psi == pytest.approx(
            0.7559289460184545
        )
        assert InnovationSpec("chisq", df=10).psi == pytest.approx(0.5)

    def test_effective_corr_localized(self):
        assert InnovationSpec("normal", q=3.0).effective_corr(10_000) == (
            pytest.approx(0.3)
        )
        assert InnovationSpec("normal", q=1.5).effective_corr(16) == (
            pytest.approx(0.75)
        )

    def test_effective_corr_out_of_range(self):
        spec = InnovationSpec("normal", q=3.0)
        with pytest.raises(ParameterError):
            spec.effective_corr(16)  # 3 / 16**0.25 = 1.5

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"kind": "laplace"},
            {"kind": "chisq"},  # df missing
            {"kind": "chisq", "df": 0},
            {"kind": "chisq", "df": 2, "corr": 0.5},
            {"kind": "chisq", "df": 2, "q": 1.0},
            {"kind": "normal", "df": 3},
            {"kind": "normal", "corr": 0.5, "q": 1.0},
            {"kind": "normal", "corr": 1.5},
        ],
    )
    def test_invalid_specs(self, kwargs):
        with pytest.raises(ParameterError):
            InnovationSpec(**kwargs)


class TestGenInnovations:
    def test_deterministic_given_seed(self):
        spec = InnovationSpec("normal", corr=0.4)
        e1, v1 = gen_innovations(spec, 64, seed=7)
        e2, v2 = gen_innovations(spec, 64, seed=7)
        assert_array_equal(e1, e2)
        assert_array_equal(v1, v2)
        e3, _ = gen_innovations(spec, 64, seed=8)
        assert not np.array_equal(e1, e3)

    def test_normal_correlation_construction(self):
        # v must be corr*eps + sqrt(1-corr^2)*w with w the second stream.
        spec = InnovationSpec("normal", corr=0.6)
        eps, v = gen_innovations(spec, 50_000, seed=1)
        w = (v - 0.6 * eps) / math.sqrt(1 - 0.36)
        assert abs(np.corrcoef(eps, w)[0, 1]) < 0.02
        assert abs(np.corrcoef(eps, v)[0, 1] - 0.6) < 0.02

    def test_chisq_standardization(self):
        spec = InnovationSpec("chisq", df=1)
        eps, v = gen_innovations(spec, 200_000, seed=2)
        assert abs(eps.mean()) < 0.02
        assert abs(eps.var() - 1.0) < 0.05
        # skewed: standardized chi-square(1) has skewness sqrt(8).
        assert ((eps**3).mean()) > 1.0
        assert abs(np.corrcoef(eps, v)[0, 1]) < 0.02

    def test_requires_positive_length(self):
        with pytest.raises(ParameterError):
            gen_innovations(InnovationSpec("normal"), 0, seed=0)


class TestRcaParams:
    def test_local_drift_resolution(self):
        p = RcaParams(T=100, a=-5.0)
        assert p.rho_T == pytest.approx(0.95)
        assert p.a_T == pytest.approx(-5.0)

    def test_local_variance_resolution(self):
        p = RcaParams(T=100, c2=4.0)
        assert p.omega2_T == pytest.approx(4.0 / 1000.0)
        assert p.c2_T == pytest.approx(4.0)
        assert p.omega_T == pytest.approx(math.sqrt(0.004))

    def test_null_defaults(self):
        p = RcaParams(T=50)
        assert p.rho_T == 1.0
        assert p.omega2_T == 0.0

    def test_consistent_pairs_accepted(self):
        p = RcaParams(T=200, rho=1.05, a=10.0, omega2=8.0 / 200**1.5, c2=8.0)
        assert p.rho_T == pytest.approx(1.05)
        assert p.c2_T == pytest.approx(8.0)

    def test_conflicting_pairs_rejected(self):
        with pytest.raises(ParameterError):
            RcaParams(T=100, rho=1.0, a=-5.0)
        with pytest.raises(ParameterError):
            RcaParams(T=100, omega2=0.5, c2=4.0)
        with pytest.raises(ParameterError):
            RcaParams(T=100, omega2=-0.1)


class TestSeries:
    def test_transition_count(self):
        s = Series(np.zeros(11))
        assert s.T == 10
        assert len(s) == 11

    def test_rejects_bad_input(self):
        with pytest.raises(ParameterError):
            Series(np.array([1.0]))
        with pytest.raises(ParameterError):
            Series(np.array([1.0, np.nan]))
        with pytest.raises(ParameterError):
            Series(np.zeros((3, 2)))


class TestSimulateRca:
    def test_constant_coefficient_recursion(self):
        eps = np.array([1.0, -2.0, 0.5])
        v = np.zeros(3)
        y = simulate_rca(RcaParams(T=3, rho=0.9, y0=2.0), eps, v)
        expected = [2.0]
        for e in eps:
            expected.append(0.9 * expected[-1] + e)
        assert_allclose(y.values, expected, rtol=0, atol=0)

    def test_random_coefficient_recursion(self):
        eps = np.array([0.3, -0.1, 0.7, 0.2])
        v = np.array([1.0, -0.5, 0.25, 2.0])
        omega2 = 0.04
        y = simulate_rca(RcaParams(T=4, rho=1.0, omega2=omega2, y0=1.0), eps, v)
        expected = [1.0]
        for e, vi in zip(eps, v):
            expected.append((1.0 + math.sqrt(omega2) * vi) * expected[-1] + e)
        assert_allclose(y.values, expected, rtol=1e-15)

    def test_zero_variance_ignores_v(self):
        eps = np.array([0.3, -0.1, 0.7])
        p = RcaParams(T=3, rho=1.0)
        y1 = simulate_rca(p, eps, np.zeros(3))
        y2 = simulate_rca(p, eps, np.full(3, 9.9))
        assert_array_equal(y1.values, y2.values)

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            simulate_rca(RcaParams(T=3), np.zeros(2), np.zeros(3))


class TestEtaReplacement:
    def test_hand_value(self):
        # eps=1, psi=0.5: sqrt(0.75)*(1-1) + 0.5*sqrt(2)*1 = sqrt(2)/2.
        out = eta_replacement(np.array([1.0]), 0.5)
        assert out[0] == pytest.approx(0.7071067811865476, rel=0, abs=1e-15)

    def test_psi_zero_reduces_to_centered_square(self):
        eps = np.array([-1.5, 0.0, 2.0])
        assert_array_equal(eta_replacement(eps, 0.0), eps * eps - 1.0)

    def test_rejects_boundary_psi(self):
        with pytest.raises(ParameterError):
            eta_replacement(np.array([1.0]), 1.0)

    def test_population_moments(self):
        rng = np.random.default_rng(3)
        eps = rng.standard_normal(400_000)
        for psi in (0.0, 0.3, 0.756):
            eta = eta_replacement(eps, psi)
            assert abs(eta.mean()) < 0.02
            assert abs(eta.var() - 2.0) < 0.05
            link = (eps * eta).mean() / math.sqrt(eps.var() * eta.var())
            assert abs(link - psi) < 0.02


class TestReplacedZ2:
    def test_matched_drift_collapses_to_unit_noise(self):
        # abar == a makes d = 0, so only 1 + eta_replacement remains; with
        # psi = 0 and eps = 1 that is exactly 1.
        out = replaced_z2(np.array([1.0, 2.0]), np.array([1.0]), a=3.0,
                          abar=3.0, psi=0.0)
        assert_array_equal(out, [1.0])

    def test_drift_mismatch_terms(self):
        y = np.array([2.0, 1.0, 3.0])
        eps = np.array([0.5, -1.0])
        a, abar, psi = 0.0, 4.0, 0.0
        d = (abar - a) / 2.0
        expected = (
            1.0 + (eps**2 - 1.0) + d * d * y[:-1] ** 2 - 2.0 * d * y[:-1] * eps
        )
        assert_allclose(replaced_z2(y, eps, a, abar, psi), expected, rtol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            replaced_z2(np.array([1.0, 2.0]), np.array([1.0, 2.0]), 0, 0, 0)


@settings(max_examples=25, deadline=None)
@given(
    rho=st.floats(0.5, 1.05),
    y0=st.floats(-2, 2),
    seed=st.integers(0, 2**31),
)
def test_simulation_matches_direct_recursion(rho, y0, seed):
    """The production loop equals a literal transcription of the recursion."""
    T = 12
    spec = InnovationSpec("normal", corr=0.3)
    eps, v = gen_innovations(spec, T, seed)
    omega2 = 0.01
    y = simulate_rca(RcaParams(T=T, rho=rho, omega2=omega2, y0=y0), eps, v)
    prev = y0
    om = math.sqrt(omega2)
    for t in range(T):
        prev = (rho + om * v[t]) * prev + eps[t]
        assert y.values[t + 1] == pytest.approx(prev, rel=1e-12, abs=1e-12)
