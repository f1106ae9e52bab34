"""Brute-force ground truth over all small labelled multigraphs.

Multigraphs on vertices ``0..n-1`` with ``m`` edges are enumerated as
multisets of the ``n(n+1)/2`` edge slots (loops included), each exactly once.
All arithmetic is exact.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Callable, Iterator, Sequence

from .errors import DomainError
from .spectral import WeightMatrix, to_fraction

MAX_N = 7
MAX_M = 8


@dataclass(frozen=True)
class Multigraph:
    """Labelled multigraph stored as slot multiplicities ``{(v, w): count}`` with ``v <= w``."""

    n: int
    multiplicities: tuple[tuple[tuple[int, int], int], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int]]) -> "Multigraph":
        cnt = Counter((min(a, b), max(a, b)) for a, b in edges)
        for (a, b) in cnt:
            if not (0 <= a < n and 0 <= b < n):
                raise DomainError(f"edge ({a}, {b}) outside vertex range [0, {n})")
        return cls(n, tuple(sorted(cnt.items())))

    @property
    def m(self) -> int:
        return sum(k for _, k in self.multiplicities)

    def edges(self) -> list[tuple[int, int]]:
        return [e for e, k in self.multiplicities for _ in range(k)]

    @cached_property
    def kappa(self) -> Fraction:
        den = 1
        for (a, b), k in self.multiplicities:
            den *= factorial(k) * (2 ** k if a == b else 1)
        return Fraction(1, den)

    @property
    def is_simple(self) -> bool:
        return all(a != b and k == 1 for (a, b), k in self.multiplicities)

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (a, b), _ in self.multiplicities:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        groups: dict[int, list[int]] = {}
        for v in range(self.n):
            groups.setdefault(find(v), []).append(v)
        return tuple(tuple(g) for g in sorted(groups.values()))

    @property
    def cc(self) -> int:
        return len(self.components)

    def component_excess(self) -> list[int]:
        """``edges - vertices`` of every component, in ``components`` order."""
        where = {}
        for i, comp in enumerate(self.components):
            for v in comp:
                where[v] = i
        e = [0] * len(self.components)
        for (a, _), k in self.multiplicities:
            e[where[a]] += k
        return [e[i] - len(comp) for i, comp in enumerate(self.components)]

    @property
    def complex_excess(self) -> int:
        return sum(x for x in self.component_excess() if x > 0)


def _guard(n: int, m: int, max_n: int, max_m: int):
    if n < 0 or m < 0:
        raise DomainError("n and m must be nonnegative")
    if n > max_n or m > max_m:
        raise DomainError(f"(n={n}, m={m}) exceeds the enumeration guard n <= {max_n}, m <= {max_m}")


def enumerate_multigraphs(n: int, m: int, max_n: int = MAX_N, max_m: int = MAX_M) -> Iterator[Multigraph]:
    _guard(n, m, max_n, max_m)
    if n == 0:
        if m == 0:
            yield Multigraph(0, ())
        return
    slots = [(a, b) for a in range(n) for b in range(a, n)]
    for combo in itertools.combinations_with_replacement(range(len(slots)), m):
        cnt = Counter(combo)
        yield Multigraph(n, tuple((slots[i], k) for i, k in sorted(cnt.items())))


def total_count(n: int, m: int) -> Fraction:
    """``n^(2m) / (2^m m!)``."""
    return Fraction(n ** (2 * m), 2 ** m * factorial(m))


@dataclass
class WeightedCount:
    value: Fraction = Fraction(0)
    terms: int = 0

    def add(self, w: Fraction):
        if w:
            self.value += w
            self.terms += 1

    def __iadd__(self, other: "WeightedCount"):
        self.value += other.value
        self.terms += other.terms
        return self


def coloring_weight(G: Multigraph, R: Sequence[Sequence[Fraction]]) -> Fraction:
    """``sum over colorings c of prod over edges R[c(v)][c(w)]``, factored by component."""
    q = len(R)
    total = Fraction(1)
    for comp in G.components:
        index = {v: i for i, v in enumerate(comp)}
        comp_edges = [((index[a], index[b]), k) for (a, b), k in G.multiplicities if a in index]
        acc = Fraction(0)
        for colors in itertools.product(range(q), repeat=len(comp)):
            w = Fraction(1)
            for (a, b), k in comp_edges:
                r = R[colors[a]][colors[b]]
                if not r:
                    w = 0
                    break
                w *= r ** k
            acc += w
        total *= acc
        if not total:
            break
    return total


def g_by_excess(R: WeightMatrix, sigma, n: int, m: int, **guard) -> dict[int, WeightedCount]:
    """Weighted counts split by complex-part excess in one enumeration pass."""
    rows = R.exact_or_raise()
    sigma = to_fraction(sigma)
    out: dict[int, WeightedCount] = {}
    for G in enumerate_multigraphs(n, m, **guard):
        w = G.kappa * sigma ** G.cc * coloring_weight(G, rows)
        out.setdefault(G.complex_excess, WeightedCount()).add(w)
    return out


def g_exact(R: WeightMatrix, sigma, n: int, m: int, excess_filter: int | None = None, **guard) -> WeightedCount:
    """``g_{R,sigma}(n, m)``: sum of ``kappa(G) sigma^cc(G) prod R`` over colored multigraphs."""
    parts = g_by_excess(R, sigma, n, m, **guard)
    if excess_filter is not None:
        return parts.get(excess_filter, WeightedCount())
    total = WeightedCount()
    for wc in parts.values():
        total += wc
    return total


def checker_count_exact(checker: Callable[[Multigraph], bool], n: int, m: int, **guard) -> WeightedCount:
    """Sum of ``kappa(G)`` over multigraphs accepted by ``checker``."""
    out = WeightedCount()
    for G in enumerate_multigraphs(n, m, **guard):
        if checker(G):
            out.add(G.kappa)
    return out


def sequence_kappa(n: int, m: int) -> dict[Multigraph, Fraction]:
    """``kappa`` recovered from the ordered pair-sequence process: count / (2^m m!)."""
    if n ** (2 * m) > 2_000_000:
        raise DomainError("sequence enumeration too large")
    counts: Counter = Counter()
    pairs = [(a, b) for a in range(n) for b in range(n)]
    for seq in itertools.product(pairs, repeat=m):
        counts[Multigraph.from_edges(n, seq)] += 1
    norm = 2 ** m * factorial(m)
    return {G: Fraction(c, norm) for G, c in counts.items()}


def to_csv_rows(R: WeightMatrix, sigma, n: int, m: int, **guard) -> list[tuple[int, int, int, str]]:
    """``(n, m, k, g)`` rows with rationals rendered ``p/q``."""
    parts = g_by_excess(R, sigma, n, m, **guard)
    return [(n, m, k, _frac(parts[k].value)) for k in sorted(parts)]


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def forall_exists_satisfiable(n: int, clauses, beta: int, width: int) -> bool:
    """Brute-force ``forall x in {0,1}^beta exists y in {0,1}^n`` over all clauses.

    A clause ``(f1, f2, e)`` reads ``y_f1 XOR y_f2 = e . (x, 1)`` where ``e`` packs
    ``width`` bits; ``width == beta + 1`` means the last bit multiplies the constant 1.
    """
    if width not in (beta, beta + 1):
        raise DomainError("clause width must be beta or beta + 1")
    const = 1 << beta if width == beta + 1 else 0
    for x in range(1 << beta):
        xv = x | const
        rhs = [bin(e & xv).count("1") & 1 for _, _, e in clauses]
        if not any(
            all(((y >> f1) ^ (y >> f2)) & 1 == r for (f1, f2, _), r in zip(clauses, rhs))
            for y in range(1 << n)
        ):
            return False
    return True


def qxor_prob_exact(E: Sequence[Sequence[int]], beta: int, n: int, m: int, **guard) -> Fraction:
    """Probability that a formula from the pair-sequence process is satisfiable.

    Clause right-hand sides are drawn uniformly from the multiset ``E``.
    """
    from .spectral import bit_index

    values = [bit_index(e) for e in E]
    width = len(E[0])
    acc = Fraction(0)
    for G in enumerate_multigraphs(n, m, **guard):
        edges = G.edges()
        sat = sum(
            forall_exists_satisfiable(n, [(a, b, e) for (a, b), e in zip(edges, labels)], beta, width)
            for labels in itertools.product(values, repeat=len(edges))
        )
        acc += G.kappa * Fraction(sat, len(values) ** len(edges))
    return acc / total_count(n, m)


def coloring_prob_exact(q: int, n: int, m: int, **guard) -> Fraction:
    """Probability that a uniform q-coloring of a random multigraph is proper, by checking each coloring."""
    acc = Fraction(0)
    for G in enumerate_multigraphs(n, m, **guard):
        edges = G.edges()
        proper = sum(
            all(c[a] != c[b] for a, b in edges) for c in itertools.product(range(q), repeat=n)
        )
        acc += G.kappa * proper
    return acc / (total_count(n, m) * q ** n)
