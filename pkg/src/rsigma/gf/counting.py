"""Exact coefficient extraction of weighted multigraph counts by complex-part excess.

A multigraph with ``n`` vertices, ``m`` edges and complex part of excess ``k``
is a set of ``p = n - m + k`` trees, a set of unicyclic components and a
complex part, so its weighted count is

    n! [z^n] (sigma U)^p / p! * exp(sigma V) * K_k(z).

Every factor is a function of the tree series ``T(z)`` and ``U = q(T - T^2/2)``
contributes ``t^p``. Lagrange inversion for ``T = z e^T`` in the form
``[z^n] H(T(z)) = [t^n] H(t) e^(n t) (1 - t)`` then leaves

    g_k(n, m) = delta^m n! (sigma q)^p / p! [t^(m-k)] A(t),
    A(t) = (1 - t/2)^p exp(sigma V(t)) K_k(t) (1 - t) e^(n t),

which needs only ``m - k + 1`` coefficients. In binary64 mode the tree
variable is rescaled to ``t = u / n`` and the result assembled in log scale.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from ..errors import DomainError, NonConvergenceError
from ..spectral import SpectralSummary
from .components import Model, as_sigma, resolve_field
from .kernels import enumerate_kernels
from .series import PowerSeries

MAX_CONDITION = 1e8


def kernel_series_t(model: Model, sigma, k: int, order: int, scale=1) -> PowerSeries:
    """``K_k`` as a series in the tree variable (scaled by ``scale``).

    Kernels with more than ``order`` vertices cannot reach the truncation
    order, so the search is restricted to at most ``order`` vertices.
    """
    out = PowerSeries.constant(0, order, model.exact)
    if order < 1:
        return out
    q = model.q
    x = model.var(order, scale)
    for G in enumerate_kernels(k, max_vertices=order):
        weight = G.kappa * as_sigma(sigma, True) ** G.cc if model.exact else float(G.kappa) * float(sigma) ** G.cc
        weight = weight / G.automorphisms
        colored = PowerSeries.constant(0, order, model.exact)
        for colors in itertools.product(range(q), repeat=G.vertices):
            term = model.one(order)
            for a, b in G.edges:
                term = term * model.path(colors[a], colors[b], order, scale)
            colored = colored + term
        xv = model.one(order)
        for _ in range(G.vertices):
            xv = xv * x
        out = out + colored * xv * weight
    return out


def kernel_series(summary: SpectralSummary, sigma, k: int, N: int, field: str = "auto",
                  variable: str = "z") -> PowerSeries:
    """Generating function of complex multigraphs of excess ``k``.

    ``variable="t"`` returns it as a series in ``T`` instead of ``z``.
    """
    if k < 1:
        raise DomainError("complex parts have positive excess")
    exact = resolve_field(summary, sigma, field)
    model = Model(summary, exact)
    sigma = as_sigma(sigma, exact)
    kt = kernel_series_t(model, sigma, k, N)
    if variable == "t":
        return kt
    if variable != "z":
        raise DomainError(f"unknown variable {variable!r}")
    from .series import cayley_series

    return kt.compose(cayley_series(N, exact))


def _check(n: int, m: int, k: int):
    if n < 1:
        raise DomainError("n must be >= 1")
    if m < 0 or k < 0:
        raise DomainError("m and k must be nonnegative")
    if n - m + k < 0:
        raise DomainError(f"infeasible (n={n}, m={m}, k={k}): n - m + k trees would be negative")


def _core_coefficient(model: Model, sigma, n: int, m: int, k: int, scale):
    """``[t^(m-k)] A(t)``; in binary64 mode also a condition estimate.

    The estimate divides the coefficient of the product of coefficientwise
    absolute values by the magnitude of the actual coefficient.
    """
    M = m - k
    p = n - m + k
    x = model.var(M, scale)
    factors = [(1 - x / 2) ** p, model.exp_sigma_v(sigma, M, scale), (1 - x) * (x * n).exp()]
    if k > 0:
        factors.append(kernel_series_t(model, sigma, k, M, scale))
    A = factors[0]
    for f in factors[1:]:
        A = A * f
    if model.exact:
        return A[M], 1.0
    majorant = None
    for f in factors:
        f = PowerSeries([abs(c) for c in f.coeffs], exact=False)
        majorant = f if majorant is None else majorant * f
    coef = A[M]
    cond = majorant[M] / abs(coef) if coef else math.inf
    return coef, cond


def exact_count(summary: SpectralSummary, sigma, n: int, m: int, k: int = 0, field: str = "auto"):
    """Weighted count of (R, sigma)-multigraphs whose complex part has excess ``k``.

    Returns a Fraction in rational mode and a float in binary64 mode (which
    may overflow for large ``n``; see ``exact_count_log``).
    """
    _check(n, m, k)
    exact = resolve_field(summary, sigma, field)
    if not exact:
        lv = exact_count_log(summary, sigma, n, m, k, "binary64")
        return 0.0 if lv == -math.inf else math.exp(lv)
    if m - k < 0:
        return Fraction(0)
    model = Model(summary, True)
    sigma = as_sigma(sigma, True)
    p = n - m + k
    coef, _ = _core_coefficient(model, sigma, n, m, k, 1)
    return model.delta ** m * math.factorial(n) * (sigma * model.q) ** p / math.factorial(p) * coef


def exact_count_log(summary: SpectralSummary, sigma, n: int, m: int, k: int = 0,
                    field: str = "auto") -> float:
    """Natural log of ``exact_count``.

    Rational mode computes the count exactly and takes its log. Binary64 mode
    rescales ``t = u / n`` and raises ``NonConvergenceError`` when cancellation
    leaves fewer than about eight significant digits.
    """
    _check(n, m, k)
    if m - k < 0:
        return -math.inf
    if resolve_field(summary, sigma, field):
        value = exact_count(summary, sigma, n, m, k, "rational")
        if value == 0:
            return -math.inf
        return math.log(value.numerator) - math.log(value.denominator)
    model = Model(summary, False)
    sigma = float(sigma)
    p = n - m + k
    M = m - k
    coef, cond = _core_coefficient(model, sigma, n, m, k, 1.0 / n)
    if coef == 0:
        return -math.inf
    if coef < 0 or cond > MAX_CONDITION:
        raise NonConvergenceError(
            f"binary64 extraction lost precision (condition {cond:.3g}); use rational mode"
        )
    return (
        m * math.log(model.delta)
        + math.lgamma(n + 1)
        + p * math.log(sigma * model.q)
        - math.lgamma(p + 1)
        + M * math.log(n)
        + math.log(coef)
    )


def exact_by_excess(summary: SpectralSummary, sigma, n: int, m: int, field: str = "auto") -> dict[int, object]:
    """``{k: g_k(n, m)}`` over every excess that can be nonzero."""
    if n < 1 or m < 0:
        raise DomainError("need n >= 1 and m >= 0")
    return {k: exact_count(summary, sigma, n, m, k, field) for k in range(max(0, m - n), m)} or {
        0: exact_count(summary, sigma, n, m, 0, field)
    }


def exact_total(summary: SpectralSummary, sigma, n: int, m: int, field: str = "auto"):
    return sum(exact_by_excess(summary, sigma, n, m, field).values())
