"""Kernels: multigraphs of minimum degree three, enumerated by excess.

A complex component prunes to its kernel by deleting degree-one vertices and
contracting degree-two paths. There are finitely many kernels of a given
excess ``k`` (at most ``2k`` vertices and ``3k`` edges), so the small cases are
found here by exhaustive search over edge multisets, then reduced to
isomorphism classes by brute-force canonical forms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from ..errors import DomainError
from .series import PowerSeries, series_pow

MAX_KERNEL_VERTICES = 5


@dataclass(frozen=True)
class Kernel:
    """One isomorphism class of kernels.

    ``edges`` lists unordered vertex pairs ``(a, b)`` with ``a <= b``, repeated
    according to multiplicity. ``automorphisms`` counts the vertex permutations
    that fix the edge multiset, so the class has ``v! / automorphisms``
    labelled members.
    """

    vertices: int
    edges: tuple[tuple[int, int], ...]
    kappa: Fraction
    cc: int
    automorphisms: int

    @property
    def excess(self) -> int:
        return len(self.edges) - self.vertices

    @property
    def labelled_copies(self) -> int:
        return factorial(self.vertices) // self.automorphisms

    @property
    def is_cubic(self) -> bool:
        return all(d == 3 for d in self.degrees())

    def degrees(self) -> list[int]:
        deg = [0] * self.vertices
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def to_json(self) -> dict:
        return {
            "vertices": self.vertices,
            "edges": [list(e) for e in self.edges],
            "kappa": f"{self.kappa.numerator}/{self.kappa.denominator}",
            "cc": self.cc,
            "excess": self.excess,
            "automorphisms": self.automorphisms,
        }


def compensation_factor(edges) -> Fraction:
    """``prod_v 2^-loops(v) * prod_pairs 1/multiplicity!`` over an edge multiset."""
    mult: dict[tuple[int, int], int] = {}
    for a, b in edges:
        key = (a, b) if a <= b else (b, a)
        mult[key] = mult.get(key, 0) + 1
    den = 1
    for (a, b), k in mult.items():
        den *= factorial(k)
        if a == b:
            den *= 2 ** k
    return Fraction(1, den)


def count_components(n: int, edges) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return comps


def _min_degree_multisets(v: int, e: int):
    """Edge-slot multiplicity vectors on ``v`` labelled vertices with ``e`` edges
    and every degree at least three (a loop adds two to its vertex)."""
    slots = [(a, b) for a in range(v) for b in range(a, v)]
    deg = [0] * v
    mult = [0] * len(slots)

    def rec(i: int, remaining: int):
        deficit = sum(max(0, 3 - d) for d in deg)
        if deficit > 2 * remaining:
            return
        if i == len(slots):
            if remaining == 0:
                yield tuple(mult)
            return
        a, b = slots[i]
        for k in range(remaining, -1, -1):
            mult[i] = k
            deg[a] += k
            deg[b] += k
            yield from rec(i + 1, remaining - k)
            deg[a] -= k
            deg[b] -= k
        mult[i] = 0

    yield from rec(0, e)


def _canonical(v: int, edges: tuple[tuple[int, int], ...]):
    best = None
    aut = 0
    for perm in itertools.permutations(range(v)):
        image = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges))
        if image == edges:
            aut += 1
        if best is None or image < best:
            best = image
    return best, aut


@lru_cache(maxsize=None)
def _kernels_with(v: int, k: int) -> tuple[Kernel, ...]:
    slots = [(a, b) for a in range(v) for b in range(a, v)]
    seen: dict[tuple, Kernel] = {}
    for mult in _min_degree_multisets(v, v + k):
        edges = tuple(s for s, m in zip(slots, mult) for _ in range(m))
        key, _ = _canonical(v, edges)
        if key in seen:
            continue
        _, aut = _canonical(v, key)
        seen[key] = Kernel(v, key, compensation_factor(key), count_components(v, key), aut)
    return tuple(seen[key] for key in sorted(seen))


def enumerate_kernels(k: int, max_vertices: int | None = None) -> list[Kernel]:
    """All kernels of excess ``k`` up to relabelling, with at most
    ``max_vertices`` vertices (default: every kernel, i.e. ``2k``)."""
    if k < 1:
        raise DomainError("kernels have positive excess")
    vmax = 2 * k if max_vertices is None else min(2 * k, max_vertices)
    if vmax > MAX_KERNEL_VERTICES:
        raise DomainError(
            f"kernel search over {vmax} vertices exceeds the cap of {MAX_KERNEL_VERTICES}; "
            "pass max_vertices to restrict it"
        )
    out: list[Kernel] = []
    for v in range(1, vmax + 1):
        out.extend(_kernels_with(v, k))
    return out


def _to_fraction_or_float(sigma):
    if isinstance(sigma, float):
        return sigma if not sigma.is_integer() else Fraction(int(sigma))
    return Fraction(sigma)


def cubic_base_series(K: int, exact: bool = True) -> PowerSeries:
    """``sum_n (6n)! / ((3!)^(2n) 2^(3n) (3n)! (2n)!) w^n`` with ``w = z^2``."""
    coeffs = [Fraction(factorial(6 * n), 288 ** n * factorial(3 * n) * factorial(2 * n)) for n in range(K + 1)]
    if exact:
        return PowerSeries(coeffs, exact=True)
    return PowerSeries([float(c) for c in coeffs], exact=False)


def cubic_kernel_weight(k: int, sigma=1):
    """Labelled cubic kernels of excess ``k`` weighted by ``kappa * sigma^cc``.

    Exact Fraction when ``sigma`` is rational, float otherwise.
    """
    if k < 0:
        raise DomainError("excess must be nonnegative")
    s = _to_fraction_or_float(sigma)
    exact = isinstance(s, Fraction)
    power = series_pow(cubic_base_series(k, exact), s)
    return factorial(2 * k) * power[k]
