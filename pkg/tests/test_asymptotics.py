import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsigma import asymptotics as asy
from rsigma.errors import DomainError, NonConvergenceError
from rsigma.spectral import WeightMatrix, chi_eval, bipartite_matrix, hamming_matrix, spectral_summary

SINGLE = spectral_summary(WeightMatrix.from_exact([[1]]))
BIP = spectral_summary(bipartite_matrix())


def test_reciprocal_gamma():
    assert asy.reciprocal_gamma(1) == 1
    assert asy.reciprocal_gamma(0) == 0
    assert asy.reciprocal_gamma(-3) == 0
    assert math.isclose(asy.reciprocal_gamma(0.5), 1 / math.sqrt(math.pi), rel_tol=1e-14)
    assert math.isclose(asy.reciprocal_gamma(-0.5), -1 / (2 * math.sqrt(math.pi)), rel_tol=1e-14)
    assert math.isclose(asy.reciprocal_gamma(-1.5), 3 / (4 * math.sqrt(math.pi)), rel_tol=1e-14)


@pytest.mark.parametrize("y", [0.5, 1, 2, 3.5, 6.5])
def test_airy_at_zero(y):
    closed = 3 ** (-(y + 1) / 3) / math.gamma((y + 1) / 3)
    assert math.isclose(asy.airy_A(y, 0), closed, rel_tol=1e-12)


def test_airy_constant():
    assert math.isclose(math.sqrt(2 * math.pi) * asy.airy_A(0.5, 0), math.sqrt(2 / 3), rel_tol=1e-12)
    assert math.isclose(asy.airy_A(3.5, 0), 0.2171, rel_tol=1e-3)


def test_airy_rejects_nonfinite():
    with pytest.raises(DomainError):
        asy.airy_A(float("nan"), 0)


def test_e_coeffs():
    for s in (Fraction(1, 2), Fraction(1), Fraction(2)):
        assert asy.e_coeffs(s, 3).values[0] == 1
    assert math.isclose(asy.e_coeffs(Fraction(1), 2).values[1], 5 / 24)
    assert math.isclose(asy.e_coeffs(Fraction(2), 2).values[1], 5 / 12)


def test_phi_one_is_one():
    """With sigma = 1 every multigraph is counted, so phi_1 is identically one."""
    for mu in (-2, -1, 0, 0.5):
        assert math.isclose(asy.phi(1, mu), 1.0, rel_tol=1e-8)
    assert math.isclose(asy.phi(1, 1.5, k_cap=150), 1.0, rel_tol=1e-8)
    # terms peak late for positive mu; the default cap is too small at mu = 3
    with pytest.raises(NonConvergenceError):
        asy.phi(1, 3.0)
    assert math.isclose(asy.phi(1, 3.0, k_cap=150), 1.0, rel_tol=1e-8)


def test_phi_leading_term():
    value, k, _ = asy.phi_series(1, 0, tol=1.0)
    assert k >= 0
    assert math.sqrt(2 * math.pi) * asy.airy_A(0.5, 0) < asy.phi(1, 0)


def test_phi_half_decreases():
    values = [asy.phi(Fraction(1, 2), mu) for mu in (-2, -1, 0, 1, 2)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert all(v > 0 for v in values)


def test_phi_cap():
    with pytest.raises(NonConvergenceError):
        asy.phi_series(Fraction(1, 2), 0, tol=1e-30, k_cap=3)


def test_env_override(monkeypatch):
    monkeypatch.setenv(asy.TOL_ENV, "1e-3")
    monkeypatch.setenv(asy.KCAP_ENV, "12")
    assert asy.default_phi_tol() == 1e-3
    _, k_loose, _ = asy.phi_series(Fraction(1, 2), 0)
    monkeypatch.delenv(asy.TOL_ENV)
    _, k_tight, _ = asy.phi_series(Fraction(1, 2), 0, k_cap=40)
    assert k_loose < k_tight


def test_window_mapping():
    n = 10 ** 6
    m = asy.critical_m(n, 1.3)
    assert abs(asy.realized_mu(n, m) - 1.3) < 2 * n ** (-2 / 3)
    assert asy.critical_m(1000, 0) == 500


def test_subcritical_single_colour_is_total():
    p = asy.log_count_subcritical(SINGLE, 1, 10 ** 4, 3000)
    assert math.isclose(p.log_value, asy.log_total(10 ** 4, 3000), rel_tol=1e-14)


def test_subcritical_bipartite_form():
    n, m = 10 ** 4, 3000
    p = asy.log_count_subcritical(BIP, 0.5, n, m)
    x = 2 * m / n
    expect = asy.log_total(n, m) + 0.25 * math.log(1 - x) - 0.25 * math.log(1 + x)
    assert math.isclose(p.log_value, expect, rel_tol=1e-13)


def test_prob_bipartite_values():
    assert math.isclose(asy.prob_bipartite(10 ** 5, 30000).prob, 2 ** -0.5, rel_tol=1e-9)
    assert math.isclose(asy.prob_bipartite(10 ** 5, 45000).prob, (0.1 / 1.9) ** 0.25, rel_tol=1e-9)
    assert asy.prob_bipartite(10 ** 5, 0).prob == 1.0
    assert asy.prob_bipartite(10 ** 5, 10).prob > 0.9999


def test_subcritical_bipartite_in_unit_interval():
    n = 10 ** 5
    for i in range(1, 49):
        p = asy.prob_bipartite(n, int(n * i / 100)).prob
        assert 0 < p < 1


def test_critical_single_colour():
    n = 10 ** 6
    pred = asy.log_count_critical(SINGLE, 1, n, 0)
    ratio = math.exp(pred.log_value - asy.log_total(n, pred.m))
    assert math.isclose(ratio, asy.phi(1, pred.mu), rel_tol=1e-9)


def test_critical_bipartite_constant():
    n = 10 ** 6
    with_factor = asy.prob_bipartite(n, 0.0, asy.CRITICAL)
    without = asy.prob_bipartite(n, 0.0, asy.CRITICAL, chi1_factor=False)
    assert math.isclose(with_factor.prob * n ** (1 / 12), asy.phi(0.5, 0) * 2 ** -0.25, rel_tol=1e-9)
    assert math.isclose(without.prob / with_factor.prob, 2 ** 0.25, rel_tol=1e-12)


def test_critical_scaling():
    summary = spectral_summary(hamming_matrix(2))
    a = asy.log_count_critical(summary, 0.5, 10 ** 5, 0)
    b = asy.log_count_critical(summary, 0.5, 4 * 10 ** 5, 0)
    base_a = a.log_value - asy.log_total(a.n, a.m) - a.m * math.log(2) - math.log(asy.phi(0.5, a.mu))
    base_b = b.log_value - asy.log_total(b.n, b.m) - b.m * math.log(2) - math.log(asy.phi(0.5, b.mu))
    # (c sigma - 1)/6 log 4 plus the (sigma q)^(n - m) term, which differs by (n_b - m_b) - (n_a - m_a)
    shift = (0.5 - 1) / 6 * math.log(4) + ((b.n - b.m) - (a.n - a.m)) * math.log(2)
    assert math.isclose(base_b - base_a, shift, rel_tol=1e-9, abs_tol=1e-9)


def test_window_guard():
    with pytest.raises(DomainError):
        asy.prob_bipartite(1000, -5.0, asy.CRITICAL)
    assert asy.prob_bipartite(1000, -5.0, asy.CRITICAL, enforce_window=False).prob > 0


def test_regime_consistency():
    n = 10 ** 6
    t = 5
    m = int(round(n * (0.5 - n ** (-1 / 3) * t / 2)))
    sub = asy.prob_bipartite(n, m).prob
    crit = asy.prob_bipartite(n, asy.realized_mu(n, m), asy.CRITICAL, enforce_window=False).prob
    assert abs(sub - crit) / sub < 0.10


def test_subcritical_domain():
    with pytest.raises(DomainError):
        asy.prob_bipartite(100, 50)
    with pytest.raises(DomainError):
        asy.prob_bipartite(100, 80)
    with pytest.raises(DomainError):
        asy.prob_coloring(1, 100, 10)


def test_qxor_with_constant_closed_form():
    n = 10 ** 5
    for m in (10000, 25000, 40000):
        x = 2 * m / n
        got = asy.prob_qxor(1, 1, "with_constant", n, m).prob
        assert math.isclose(got, (1 + x) ** -0.125 * (1 - x) ** 0.375, rel_tol=1e-9)
    assert asy.prob_qxor(1, 1, "with_constant", n, 0).prob == 1


def test_qxor_even_alpha_uses_two_blocks():
    summary = asy.qxor_summary(2, 3, "plain")
    assert summary.c == 2
    n, m = 10 ** 5, 20000
    x = 2 * m / n
    sigma = 1 / summary.q
    expect = (1 - x) ** ((1 - 2 * sigma) / 2) * chi_eval(summary, x) ** (-sigma / 2)
    assert math.isclose(asy.prob_qxor(2, 3, "plain", n, m).prob, expect, rel_tol=1e-9)


def test_coloring_values():
    assert math.isclose(asy.prob_coloring(2, 100, 30).prob, 0.5 ** 30 * 1.6 ** -0.5, rel_tol=1e-12)
    assert math.isclose(asy.prob_coloring(3, 60, 6).prob, 0.0798, rel_tol=2e-3)
    assert math.isclose(asy.prob_coloring(3, 60, 6).prob, asy.prob_coloring_general(3, 60, 6).prob, rel_tol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 8), st.floats(0.01, 0.45))
def test_coloring_general_route(q, ratio):
    n = 10 ** 4
    m = int(ratio * n)
    assert math.isclose(asy.prob_coloring(q, n, m).prob, asy.prob_coloring_general(q, n, m).prob, rel_tol=1e-9)


def test_prediction_json():
    obj = json.loads(json.dumps(asy.prob_bipartite(10 ** 4, 0.5, asy.CRITICAL).to_json()))
    assert obj["regime"] == "critical" and obj["truncation_k"] > 0
