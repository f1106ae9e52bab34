import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsigma.errors import DomainError, NonConvergenceError
from rsigma.gf import (
    PowerSeries,
    cayley_series,
    component_series,
    cubic_base_series,
    cubic_kernel_weight,
    enumerate_kernels,
    exact_by_excess,
    exact_count,
    exact_count_log,
    exact_total,
    kernel_series,
    series_pow,
    simple_adjust_V,
)
from rsigma.oracle import g_by_excess, total_count
from rsigma.spectral import WeightMatrix, bipartite_matrix, ham_power, hamming_matrix, spectral_summary, with_constant

F = Fraction
SINGLE = spectral_summary(WeightMatrix.from_exact([[1]]))
BIP = spectral_summary(bipartite_matrix())


def z(order, exact=True):
    return PowerSeries.variable(order, exact)


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=7)


def series_strategy(order=6, const=None):
    head = st.just(F(const)) if const is not None else rationals
    return st.tuples(head, st.lists(rationals, min_size=order, max_size=order)).map(
        lambda t: PowerSeries([t[0], *t[1]], exact=True)
    )


# ---------------------------------------------------------------------------
# power series


def test_cayley_examples():
    assert cayley_series(1).coeffs == (0, 1)
    T = cayley_series(8)
    assert T[3] == F(3, 2) and T[4] == F(8, 3)


@pytest.mark.parametrize("exact", [True, False])
def test_cayley_defining_equation(exact):
    T = cayley_series(20, exact)
    residual = T - z(20, exact) * T.exp()
    if exact:
        assert all(c == 0 for c in residual.coeffs)
    else:
        assert all(abs(r) <= 1e-13 * t for r, t in zip(residual.coeffs[1:], T.coeffs[1:]))


def test_pow_examples():
    half = series_pow(1 + z(5), F(1, 2))
    assert half.coeffs[:4] == (1, F(1, 2), F(-1, 8), F(1, 16))
    G = PowerSeries([2, 3, 5, 7])
    assert series_pow(G, 0).coeffs == (1, 0, 0, 0)
    assert series_pow(G, 1) == G


@settings(max_examples=40, deadline=None)
@given(series_strategy(const=1), series_strategy(const=1))
def test_series_ring_laws(A, B):
    assert A * B == B * A
    assert (A * B).log() == A.log() + B.log()
    assert A.log().exp() == A
    assert A * A.reciprocal() == PowerSeries.constant(1, A.order)


@settings(max_examples=40, deadline=None)
@given(series_strategy(const=1), rationals, rationals)
def test_pow_laws(A, s, t):
    assert series_pow(A, s) * series_pow(A, t) == series_pow(A, s + t)
    assert series_pow(series_pow(A, s), 2) == series_pow(A, 2 * s)


@settings(max_examples=40, deadline=None)
@given(series_strategy(), series_strategy(const=0))
def test_compose_matches_derivative_chain_rule(A, G):
    # (A o G)' = (A' o G) G'
    lhs = A.compose(G).derivative()
    rhs = A.derivative().compose(G.truncate(G.order - 1)) * G.derivative()
    assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(series_strategy())
def test_integral_inverts_derivative(A):
    assert A.derivative().integral(A[0]) == A.truncate(A.order)


def test_float_mode_tracks_exact():
    A = PowerSeries([1, F(1, 3), F(-2, 5), F(1, 7), 0, F(3, 2)])
    Af = A.to_float()
    for op in (lambda s: s.log(), lambda s: series_pow(s, F(-3, 4)), lambda s: s.reciprocal()):
        ex, fl = op(A), op(Af)
        assert all(math.isclose(float(a), b, rel_tol=1e-12, abs_tol=1e-14) for a, b in zip(ex.coeffs, fl.coeffs))


def test_exact_mode_rejects_floats():
    with pytest.raises(TypeError):
        PowerSeries([1, 0.5])
    with pytest.raises(DomainError):
        PowerSeries([2, 1]).log()
    with pytest.raises(DomainError):
        PowerSeries([1, 1]).compose(PowerSeries([1, 1]))


@pytest.mark.parametrize("exact", [True, False])
def test_series_json_round_trip(exact):
    A = cayley_series(6, exact)
    obj = json.loads(json.dumps(A.to_json()))
    assert obj["field"] == ("rational" if exact else "binary64")
    assert PowerSeries.from_json(obj) == A


# ---------------------------------------------------------------------------
# component series


def test_single_colour_components():
    N = 10
    cs = component_series(SINGLE, N)
    T = cs.T
    assert cs.U == T - T * T / 2
    assert cs.V == (1 - T).log() * F(-1, 2)


def test_unrooted_tree_derivative():
    # z U' = q T for the unrooted tree series
    for summary in (SINGLE, BIP, spectral_summary(hamming_matrix(2))):
        cs = component_series(summary, 9)
        lhs = (z(9) * cs.U.derivative()).truncate(8)
        assert lhs == (cs.T * summary.q).truncate(8)


def test_bipartite_unicyclic():
    cs = component_series(BIP, 10)
    T = cs.T
    assert (cs.V * 2).exp() == (1 - T * T).reciprocal()


def test_path_constant_term():
    cs = component_series(BIP, 6)
    assert cs.P[0][1][0] == 1
    assert cs.P[0][0][0] == 0


@pytest.mark.parametrize("R", [bipartite_matrix(), hamming_matrix(2), hamming_matrix(3)],
                         ids=["bipartite", "ham2", "ham3"])
def test_path_growth_is_bounded(R):
    """P_ij - 1/(q(1 - T)) carries no pole at T = 1: coefficient ratios stay bounded."""
    summary = spectral_summary(R)
    N = 50
    cs = component_series(summary, N, "binary64")
    T = cs.T
    simple_pole = (1 - T).reciprocal() / summary.q
    ref = (1 - T).reciprocal()
    for i in range(summary.q):
        for j in range(summary.q):
            rest = cs.P[i][j] - simple_pole
            ratios = [abs(rest[n]) / ref[n] for n in range(10, N + 1)]
            assert max(ratios) < 2.0


def test_simple_adjustments():
    cs = component_series(BIP, 8)
    assert simple_adjust_V(BIP, cs) == cs.V - cs.T * cs.T / 2
    cs1 = component_series(SINGLE, 8)
    assert simple_adjust_V(SINGLE, cs1) == cs1.V - cs1.T / 2 - cs1.T * cs1.T / 4


# ---------------------------------------------------------------------------
# kernels


def test_kernels_of_excess_one():
    ks = enumerate_kernels(1)
    assert sorted(K.kappa for K in ks) == [F(1, 8), F(1, 6), F(1, 4)]
    cubic = [K for K in ks if K.is_cubic]
    assert sorted(K.kappa for K in cubic) == [F(1, 6), F(1, 4)]
    assert sum(K.kappa for K in cubic) == F(5, 12)
    one_vertex = [K for K in ks if K.vertices == 1]
    assert len(one_vertex) == 1 and len(one_vertex[0].edges) == 2


def test_kernel_invariants():
    for k in (1, 2):
        for K in enumerate_kernels(k):
            assert K.excess == k
            assert min(K.degrees()) >= 3
            assert K.vertices <= 2 * k
            assert math.factorial(K.vertices) % K.automorphisms == 0


@pytest.mark.parametrize("k", [0, 1, 2])
def test_cubic_weight_matches_enumeration(k):
    if k == 0:
        assert cubic_kernel_weight(0) == 1
        return
    for sigma in (F(1), F(1, 2), F(3)):
        enum = sum(
            K.kappa * sigma ** K.cc * K.labelled_copies for K in enumerate_kernels(k) if K.is_cubic
        )
        assert cubic_kernel_weight(k, sigma) == enum


def test_cubic_weight_values():
    assert cubic_kernel_weight(1, 1) == F(5, 12)
    assert cubic_kernel_weight(1, F(1, 2)) == F(5, 24)
    assert cubic_kernel_weight(2, 1) == F(385, 48)
    assert cubic_base_series(2)[1] == F(5, 24)


def test_kernel_search_cap():
    with pytest.raises(DomainError):
        enumerate_kernels(3)
    with pytest.raises(DomainError):
        enumerate_kernels(0)
    assert all(K.vertices <= 3 for K in enumerate_kernels(3, max_vertices=3))


def test_kernel_series_single_colour():
    """K_1 for R = (1) in the tree variable: two rational terms with the cubic term's coefficient 5/24."""
    N = 12
    for sigma in (F(1), F(1, 2)):
        Kt = kernel_series(SINGLE, sigma, 1, N, variable="t")
        t = z(N)
        expect = sigma * t / 8 * series_pow(1 - t, -2) + sigma * F(5, 24) * t * t * series_pow(1 - t, -3)
        assert Kt == expect
        assert kernel_series(SINGLE, sigma, 1, N)[0] == 0


def test_kernel_json():
    obj = json.loads(json.dumps(enumerate_kernels(1)[0].to_json()))
    assert obj["excess"] == 1


# ---------------------------------------------------------------------------
# exact counts


def test_exact_count_examples():
    assert exact_count(SINGLE, 1, 3, 1) == F(9, 2)
    assert exact_count(BIP, F(1, 2), 2, 1) == 1
    for n in range(1, 6):
        for summary, sigma in ((SINGLE, F(1)), (BIP, F(1, 2)), (BIP, F(3))):
            assert exact_count(summary, sigma, n, 0) == (sigma * summary.q) ** n
            assert exact_count(summary, sigma, n, 0, 1) == 0


def test_total_identity_through_gf():
    for n in range(1, 8):
        for m in range(0, 8):
            assert exact_total(SINGLE, 1, n, m) == total_count(n, m)


def test_exact_by_excess_keys():
    parts = exact_by_excess(SINGLE, 1, 4, 6)
    assert min(parts) == 2 and max(parts) == 5


def test_binary64_agrees_with_rational():
    for n, m, k in ((20, 10, 0), (20, 10, 1), (60, 30, 1), (40, 15, 0)):
        exact = exact_count_log(SINGLE, 1, n, m, k, "rational")
        approx = exact_count_log(SINGLE, 1, n, m, k, "binary64")
        assert math.isclose(exact, approx, rel_tol=1e-9)


def test_binary64_refuses_ill_conditioned_extraction():
    with pytest.raises(NonConvergenceError):
        exact_count_log(SINGLE, 1, 200, 100, 1, "binary64")


def test_infeasible_arguments():
    with pytest.raises(DomainError):
        exact_count(SINGLE, 1, 3, 5, 0)
    with pytest.raises(DomainError):
        exact_count(SINGLE, 1, 0, 0)
    with pytest.raises(DomainError):
        exact_count(SINGLE, 0.5, 3, 1, field="rational")


@pytest.mark.parametrize("R", [hamming_matrix(2), ham_power(2, 2), with_constant(hamming_matrix(1))],
                         ids=lambda R: R.provenance)
def test_exact_counts_match_oracle_beyond_two_colours(R):
    """Includes a reducible matrix (c = 2)."""
    summary = spectral_summary(R)
    for sigma in (F(1, 4), F(1)):
        for n in range(1, 5):
            for m in range(0, 5):
                for k, wc in g_by_excess(R, sigma, n, m).items():
                    assert exact_by_excess(summary, sigma, n, m)[k] == wc.value
