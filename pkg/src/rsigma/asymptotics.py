"""Asymptotic counts and phase-transition probabilities.

Two regimes are covered. Below the threshold (``m/n`` fixed in ``(0, 1/2)``)
almost every multigraph has only trees and unicyclic components. In the
critical window ``m = (n/2)(1 + mu n^(-1/3))`` complex components appear and
the count picks up the factor ``phi_{c sigma}(mu) n^((c sigma - 1)/6)``.

Counts are assembled in natural-log scale; probabilities are reported raw,
without clamping to [0, 1].
"""
from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .errors import DomainError, NonConvergenceError
from .gf.kernels import cubic_base_series
from .gf.series import series_pow
from .spectral import (
    SpectralSummary,
    bipartite_matrix,
    chi_eval,
    coloring_matrix,
    qxor_matrix,
    spectral_summary,
)

A_TERM_CAP = 10_000
PHI_TOL = 1e-10
PHI_K_CAP = 40
ROUNDOFF = 1e-13

TOL_ENV = "RSIGMA_PHI_TOL"
KCAP_ENV = "RSIGMA_PHI_KCAP"

SUBCRITICAL = "subcritical"
CRITICAL = "critical"


def default_phi_tol() -> float:
    """``PHI_TOL`` unless overridden by the ``RSIGMA_PHI_TOL`` environment variable."""
    raw = os.environ.get(TOL_ENV)
    return float(raw) if raw else PHI_TOL


def default_phi_k_cap() -> int:
    raw = os.environ.get(KCAP_ENV)
    return int(raw) if raw else PHI_K_CAP


@dataclass(frozen=True)
class Prediction:
    regime: str
    n: int
    m: int
    mu: float | None = None
    log_value: float | None = None
    prob: float | None = None
    truncation_k: int = 0
    truncation_error_estimate: float = 0.0

    def to_json(self) -> dict:
        return asdict(self)


def reciprocal_gamma(x: float) -> float:
    """``1 / Gamma(x)``, exactly zero at the poles ``x = 0, -1, -2, ...``."""
    if x <= 0 and float(x).is_integer():
        return 0.0
    if x > 0:
        return math.exp(-math.lgamma(x))
    # Gamma alternates sign between consecutive negative integers.
    sign = -1.0 if math.floor(-x) % 2 == 0 else 1.0
    return sign * math.exp(-math.lgamma(x))


def log_total(n: int, m: int) -> float:
    """``log(n^(2m) / (2^m m!))``."""
    if n < 1 or m < 0:
        raise DomainError("need n >= 1 and m >= 0")
    return 2 * m * math.log(n) - m * math.log(2) - math.lgamma(m + 1)


def airy_A(y: float, mu: float, tol: float = 1e-16) -> float:
    """``e^(-mu^3/6) 3^(-(y+1)/3) sum_k (3^(2/3) mu/2)^k / (k! Gamma((y+1-2k)/3))``.

    Summed in extended precision: for negative ``mu`` the partial sums are
    ``e^(|mu|^3/6)`` times larger than the result.
    """
    if not (math.isfinite(y) and math.isfinite(mu)):
        raise DomainError("airy_A needs finite arguments")
    extra = max(0.0, -mu) ** 3 / 6 / math.log(10)
    with mpmath.workdps(25 + int(extra)):
        yy, mm = mpmath.mpf(y), mpmath.mpf(mu)
        ratio = mpmath.cbrt(9) * mm / 2
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)  # ratio^k / k!
        small = 0
        k_min = abs(mu) ** 3
        for k in range(A_TERM_CAP):
            term = power * mpmath.rgamma((yy + 1 - 2 * k) / 3)
            total += term
            if abs(term) <= tol * abs(total):
                small += 1
            else:
                small = 0
            if small >= 3 and k > k_min:
                break
            power = power * ratio / (k + 1)
        else:
            raise NonConvergenceError(f"A({y}, {mu}) did not converge within {A_TERM_CAP} terms")
        out = mpmath.exp(-mm ** 3 / 6) / mpmath.power(3, (yy + 1) / 3) * total
        return float(out)


@dataclass(frozen=True)
class ECoeffTable:
    sigma: float
    values: tuple[float, ...]


@lru_cache(maxsize=64)
def e_coeffs(sigma, K: int) -> ECoeffTable:
    """``e_k`` = coefficient of ``z^(2k)`` in the cubic-kernel base series to the power sigma."""
    if K < 0:
        raise DomainError("K must be nonnegative")
    exact = not isinstance(sigma, float) or float(sigma).is_integer()
    s = (Fraction(sigma) if not isinstance(sigma, float) else Fraction(int(sigma))) if exact else sigma
    power = series_pow(cubic_base_series(K, exact), s)
    return ECoeffTable(float(sigma), tuple(float(c) for c in power.coeffs))


def _sigma_key(sigma):
    if isinstance(sigma, float) and not sigma.is_integer():
        f = Fraction(sigma).limit_denominator(1 << 20)
        return f if float(f) == sigma else sigma
    return Fraction(sigma) if not isinstance(sigma, float) else Fraction(int(sigma))


def phi_series(sigma, mu: float, tol: float | None = None, k_cap: int | None = None) -> tuple[float, int, float]:
    """``sqrt(2 pi) sum_k e_k sigma^k A(3k + sigma/2, mu)`` with its truncation data.

    Returns ``(value, truncation_k, last_term)``. Stops once two consecutive
    terms fall below ``tol`` times the partial sum.
    """
    tol = default_phi_tol() if tol is None else tol
    k_cap = default_phi_k_cap() if k_cap is None else k_cap
    sigma_key = _sigma_key(sigma)
    s = float(sigma_key)
    if s <= 0:
        raise DomainError("sigma must be positive")
    table = e_coeffs(sigma_key, k_cap).values
    root = math.sqrt(2 * math.pi)
    total = 0.0
    small = 0
    biggest = 0.0
    for k in range(k_cap + 1):
        term = root * table[k] * s ** k * airy_A(3 * k + s / 2, mu)
        total += term
        biggest = max(biggest, abs(term))
        # the absolute floor covers large mu, where the sum itself sits near roundoff
        floor = max(tol * abs(total), ROUNDOFF * biggest)
        small = small + 1 if abs(term) <= floor else 0
        if small >= 2:
            return total, k, abs(term)
    raise NonConvergenceError(f"phi_{s}({mu}) not converged after {k_cap} terms (last term {term:.3g})")


def phi(sigma, mu: float, tol: float | None = None, k_cap: int | None = None) -> float:
    return phi_series(sigma, mu, tol, k_cap)[0]


def critical_m(n: int, mu: float) -> int:
    return int(round(n / 2 * (1 + mu * n ** (-1 / 3))))


def realized_mu(n: int, m: int) -> float:
    return (2 * m / n - 1) * n ** (1 / 3)


def _ratio(n: int, m: int) -> float:
    if n < 1 or m < 0:
        raise DomainError("need n >= 1 and m >= 0")
    x = 2 * m / n
    if x >= 1:
        raise DomainError(f"m/n = {m / n:.4g} is not below the threshold 1/2")
    return x


def log_count_subcritical(summary: SpectralSummary, sigma: float, n: int, m: int) -> Prediction:
    x = _ratio(n, m)
    if m == 0:
        raise DomainError("m/n must be positive in the subcritical regime")
    s = float(sigma)
    chi = chi_eval(summary, x)
    value = (
        log_total(n, m)
        + (1 - summary.c * s) / 2 * math.log1p(-x)
        + m * math.log(summary.delta)
        + (n - m) * math.log(s * summary.q)
        - s / 2 * math.log(chi)
    )
    return Prediction(SUBCRITICAL, n, m, log_value=value)


def _window(n: int, mu: float, enforce_window: bool) -> int:
    if enforce_window and abs(mu) > n ** (1 / 12):
        raise DomainError(f"|mu| = {abs(mu):.4g} exceeds the window bound n^(1/12) = {n ** (1 / 12):.4g}")
    return critical_m(n, mu)


def log_count_critical(summary: SpectralSummary, sigma: float, n: int, mu: float,
                       enforce_window: bool = True) -> Prediction:
    m = _window(n, mu, enforce_window)
    mu_r = realized_mu(n, m)
    s = float(sigma)
    cs = summary.c * s
    value, k, last = phi_series(_sigma_key(sigma) * summary.c, mu_r)
    out = (
        log_total(n, m)
        + math.log(value)
        + (cs - 1) / 6 * math.log(n)
        + m * math.log(summary.delta)
        + (n - m) * math.log(s * summary.q)
        - s / 2 * math.log(summary.chi_at_one)
    )
    return Prediction(CRITICAL, n, m, mu=mu_r, log_value=out, truncation_k=k, truncation_error_estimate=last)


def _probability(summary: SpectralSummary, sigma, n: int, m_or_mu, regime: str, divisor_log: float | None = None,
                 enforce_window: bool = True) -> Prediction:
    """Asymptotic count divided by ``total(n, m) * delta^m``."""
    if regime == SUBCRITICAL:
        m = int(m_or_mu)
        if m == 0:
            _ratio(n, m)
            return Prediction(SUBCRITICAL, n, 0, prob=1.0)
        pred = log_count_subcritical(summary, sigma, n, m)
    elif regime == CRITICAL:
        pred = log_count_critical(summary, sigma, n, float(m_or_mu), enforce_window)
        m = pred.m
    else:
        raise DomainError(f"unknown regime {regime!r}")
    base = log_total(n, m) + m * math.log(summary.delta) if divisor_log is None else divisor_log
    return Prediction(
        pred.regime, n, m, pred.mu, pred.log_value, math.exp(pred.log_value - base),
        pred.truncation_k, pred.truncation_error_estimate,
    )


@lru_cache(maxsize=None)
def _bipartite_summary() -> SpectralSummary:
    return spectral_summary(bipartite_matrix())


def prob_bipartite(n: int, m_or_mu, regime: str = SUBCRITICAL, chi1_factor: bool = True,
                   enforce_window: bool = True) -> Prediction:
    """Probability that a random multigraph is bipartite.

    ``chi1_factor=False`` drops the constant ``chi(1)^(-1/4) = 2^(-1/4)`` from the
    critical-window form, giving the reading in which ``n^(1/12) P -> phi_{1/2}(mu)``.
    """
    pred = _probability(_bipartite_summary(), Fraction(1, 2), n, m_or_mu, regime, enforce_window=enforce_window)
    if regime == CRITICAL and not chi1_factor:
        return Prediction(pred.regime, n, pred.m, pred.mu, pred.log_value + 0.25 * math.log(2),
                          pred.prob * 2 ** 0.25, pred.truncation_k, pred.truncation_error_estimate)
    return pred


@lru_cache(maxsize=None)
def qxor_summary(alpha: int, beta: int, variant: str) -> SpectralSummary:
    return spectral_summary(qxor_matrix(alpha, beta, variant))


def prob_qxor(alpha: int, beta: int, variant: str, n: int, m_or_mu, regime: str = SUBCRITICAL,
              enforce_window: bool = True) -> Prediction:
    """Probability that a random quantified 2-XOR formula is satisfiable.

    sigma is one over the number of colors; delta, c and chi come from the
    computed spectrum of the clause matrix.
    """
    summary = qxor_summary(alpha, beta, variant)
    return _probability(summary, Fraction(1, summary.q), n, m_or_mu, regime, enforce_window=enforce_window)


def prob_coloring(q: int, n: int, m: int) -> Prediction:
    """Probability that a uniform random q-coloring of a random multigraph is proper."""
    if q < 2:
        raise DomainError("q must be >= 2")
    x = _ratio(n, m)
    log_p = m * math.log1p(-1 / q) - (q - 1) / 2 * math.log1p(x / (q - 1))
    return Prediction(SUBCRITICAL, n, m, log_value=log_p, prob=math.exp(log_p))


def prob_coloring_general(q: int, n: int, m: int) -> Prediction:
    """Same probability through the general count with the complete-graph color matrix."""
    summary = spectral_summary(coloring_matrix(q))
    return _probability(summary, 1, n, m, SUBCRITICAL,
                        divisor_log=log_total(n, m) + n * math.log(q) if m else None)
