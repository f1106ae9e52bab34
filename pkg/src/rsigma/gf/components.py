"""Generating functions of colored trees, unicyclic components and paths of trees.

All series here are for the normalized matrix ``R / delta``; counts for ``R``
follow by multiplying the coefficient of ``m`` edges by ``delta^m``. Because
every color's rooted-tree series coincides with the Cayley tree function ``T``,
each component series is a function of ``T`` alone. ``Model`` builds those
functions as series in the tree variable ``t`` (optionally rescaled, ``t = s u``,
which keeps binary64 coefficients in range for large orders); the ``z`` series
are obtained by substituting ``T(z)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import DomainError
from ..spectral import SpectralSummary, chi_exact, exact_row_sum
from .series import PowerSeries, cayley_series, series_pow

DELTA_RTOL = 1e-9


def resolve_field(summary: SpectralSummary, sigma, field: str) -> bool:
    """True for rational arithmetic. ``auto`` picks it whenever possible."""
    rational_sigma = not isinstance(sigma, float) or float(sigma).is_integer()
    possible = summary.matrix.is_exact and rational_sigma
    if field == "auto":
        return possible
    if field == "rational":
        if not possible:
            raise DomainError("rational mode needs exact matrix entries and a rational sigma")
        return True
    if field == "binary64":
        return False
    raise DomainError(f"unknown field {field!r}")


def as_sigma(sigma, exact: bool):
    if exact:
        return Fraction(sigma) if not isinstance(sigma, float) else Fraction(int(sigma))
    return float(sigma)


class Model:
    """Normalized weight matrix plus the pieces every series is built from."""

    def __init__(self, summary: SpectralSummary, exact: bool):
        self.summary = summary
        self.exact = exact
        self.q = summary.q
        self.c = summary.c
        R = summary.matrix
        if exact:
            delta = exact_row_sum(R)
            if abs(float(delta) - summary.delta) > DELTA_RTOL * summary.delta:
                raise DomainError(
                    f"row sum {delta} differs from the greatest eigenvalue {summary.delta}; "
                    "matrix is not vertex-transitive"
                )
            self.delta = delta
            self.rn = [[v / delta for v in row] for row in R.exact]
            self.chi = chi_exact(R, self.c)
        else:
            self.delta = summary.delta
            self.rn = np.asarray(R.entries) / summary.delta
            self.chi = list(summary.chi)
            self.chi_roots = [lam / summary.delta for lam in summary.spectrum[summary.c:]]
        self._paths: dict[tuple[int, float], list] = {}

    def one(self, order: int) -> PowerSeries:
        return PowerSeries.constant(1, order, self.exact)

    def var(self, order: int, scale=1) -> PowerSeries:
        return PowerSeries.variable(order, self.exact, scale)

    def chi_series(self, order: int, scale=1) -> PowerSeries:
        return PowerSeries(self.chi, order, self.exact).scale(scale)

    def exp_sigma_v(self, sigma, order: int, scale=1) -> PowerSeries:
        """``exp(sigma V) = (1 - t)^(-c sigma/2) chi(t)^(-sigma/2)``, factor by factor."""
        x = self.var(order, scale)
        out = series_pow(1 - x, -sigma * self.c / 2)
        if self.exact:
            return out * series_pow(self.chi_series(order, scale), -sigma / 2)
        for root in self.chi_roots:
            if abs(root) > 1e-14:
                out = out * series_pow(1 - x * root, -sigma / 2)
        return out

    def path_matrices(self, order: int) -> list:
        """``(R/delta)^(j+1)`` for ``j = 0..order``: coefficients of ``R (I - tR)^-1``."""
        if self.exact:
            mats, cur = [], self.rn
            for _ in range(order + 1):
                mats.append(cur)
                cur = [[sum(a * b for a, b in zip(row, col)) for col in zip(*self.rn)] for row in cur]
            return mats
        lam = np.array(self.summary.spectrum) / self.summary.delta
        Q = self.summary.eigenvectors
        return [(Q * lam ** (j + 1)) @ Q.T for j in range(order + 1)]

    def path(self, i: int, j: int, order: int, scale=1) -> PowerSeries:
        key = (order, scale)
        if key not in self._paths:
            self._paths[key] = self.path_matrices(order)
        mats = self._paths[key]
        coeffs = [mats[d][i][j] for d in range(order + 1)]
        return PowerSeries(coeffs, order, self.exact).scale(scale)


@dataclass(frozen=True)
class ComponentSeries:
    """Series in ``z`` for rooted trees, unrooted trees, unicyclic components and paths."""

    T: PowerSeries
    U: PowerSeries
    V: PowerSeries
    P: tuple[tuple[PowerSeries, ...], ...]
    q: int


def component_series(summary: SpectralSummary, N: int, field: str = "auto") -> ComponentSeries:
    if N < 1:
        raise DomainError("truncation order must be >= 1")
    exact = resolve_field(summary, 1, field)
    model = Model(summary, exact)
    T = cayley_series(N, exact)
    U = (T - T * T / 2) * summary.q
    one_minus_t = 1 - T
    V = one_minus_t.log() * (-Fraction(model.c, 2) if exact else -model.c / 2)
    chi_t = PowerSeries(model.chi, N, exact).compose(T)
    V = V - chi_t.log() / 2
    P = tuple(
        tuple(model.path(i, j, N).compose(T) for j in range(summary.q)) for i in range(summary.q)
    )
    return ComponentSeries(T=T, U=U, V=V, P=P, q=summary.q)


def simple_adjust_V(summary: SpectralSummary, series: ComponentSeries) -> PowerSeries:
    """Unicyclic series for simple graphs: drop loops and double edges.

    ``V - 1/2 sum_i R_ii T - 1/4 sum_ij R_ij^2 T^2`` with ``R`` normalized.
    """
    exact = series.T.exact
    model = Model(summary, exact)
    rn = model.rn
    q = summary.q
    diag = sum((rn[i][i] for i in range(q)), Fraction(0) if exact else 0.0)
    squares = sum((rn[i][j] ** 2 for i in range(q) for j in range(q)), Fraction(0) if exact else 0.0)
    T = series.T
    return series.V - T * (diag / 2) - (T * T) * (squares / 4)
