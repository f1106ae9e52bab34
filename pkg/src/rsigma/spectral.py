"""Weight matrices and the spectral data consumed by the asymptotic formulas.

A weight matrix ``R`` is a symmetric, nonnegative ``q x q`` matrix. Vertex
colors index its rows; an edge between colors ``i`` and ``j`` has weight
``R[i, j]``. The asymptotic counts depend on ``R`` only through its greatest
eigenvalue ``delta``, the multiplicity ``c`` of that eigenvalue, the dimension
``q`` and the polynomial

    chi(X) = prod over the other eigenvalues lam of (1 - (lam / delta) X).

Family constructors (Hamming matrices and their relatives) keep exact integer
entries next to the binary64 array so the brute-force oracle and the exact
generating-function engine can run in rational arithmetic.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, NonConvergenceError

MAX_HAMMING_BETA = 10
JACOBI_TOL = 1e-12
CLUSTER_RTOL = 1e-8
SNAP_RTOL = 1e-10


def to_fraction(x) -> Fraction:
    """Parse ints, Fractions, floats and ``"p/q"`` strings into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x)).limit_denominator(10**12)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


@dataclass(frozen=True)
class WeightMatrix:
    """Symmetric nonnegative q x q matrix with optional exact entries."""

    entries: np.ndarray
    provenance: str = "custom"
    exact: tuple[tuple[Fraction, ...], ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DomainError(f"weight matrix must be square and nonempty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("weight matrix has non-finite entries")
        if np.any(a < 0):
            raise DomainError("weight matrix has negative entries")
        if not np.array_equal(a, a.T):
            raise DomainError("weight matrix is not symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.exact is not None:
            ex = tuple(tuple(to_fraction(v) for v in row) for row in self.exact)
            if len(ex) != a.shape[0] or any(len(row) != a.shape[0] for row in ex):
                raise DomainError("exact entries do not match the matrix shape")
            object.__setattr__(self, "exact", ex)

    @classmethod
    def from_exact(cls, rows: Sequence[Sequence], provenance: str = "custom") -> "WeightMatrix":
        ex = tuple(tuple(to_fraction(v) for v in row) for row in rows)
        try:
            arr = np.array([[float(v) for v in row] for row in ex], dtype=float)
        except OverflowError as exc:
            raise DomainError("matrix entries exceed the binary64 range") from exc
        return cls(arr, provenance, ex)

    @property
    def q(self) -> int:
        return self.entries.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def exact_or_raise(self) -> tuple[tuple[Fraction, ...], ...]:
        if self.exact is None:
            raise DomainError(f"matrix {self.provenance!r} carries no exact entries")
        return self.exact

    def to_json(self) -> dict:
        if self.exact is not None:
            flat = [_fraction_json(v) for row in self.exact for v in row]
        else:
            flat = [float(v) for v in self.entries.ravel()]
        return {"q": self.q, "entries": flat, "provenance": self.provenance}

    @classmethod
    def from_json(cls, obj: dict | str) -> "WeightMatrix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        q = int(obj["q"])
        flat = list(obj["entries"])
        if len(flat) != q * q:
            raise DomainError(f"expected {q * q} entries, got {len(flat)}")
        rows = [flat[i * q:(i + 1) * q] for i in range(q)]
        if all(isinstance(v, (int, str)) for v in flat):
            return cls.from_exact(rows, obj.get("provenance", "custom"))
        return cls(np.array(rows, dtype=float), obj.get("provenance", "custom"))


def _fraction_json(v: Fraction):
    return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


# ---------------------------------------------------------------------------
# Family constructors


def bit_index(bits: Sequence[int]) -> int:
    """Index of a bit tuple ``(b_0, ..., b_{beta-1})``: ``sum b_k 2^k``."""
    return sum((int(b) & 1) << k for k, b in enumerate(bits))


def index_bits(j: int, beta: int) -> tuple[int, ...]:
    return tuple((j >> k) & 1 for k in range(beta))


def _int_matrix(rows, provenance: str) -> WeightMatrix:
    return WeightMatrix.from_exact([[Fraction(int(v)) for v in row] for row in rows], provenance)


def hamming_matrix(beta: int) -> WeightMatrix:
    """Adjacency matrix of the beta-dimensional hypercube on bit tuples."""
    if beta < 1:
        raise DomainError("beta must be >= 1")
    if beta > MAX_HAMMING_BETA:
        raise DomainError(f"beta={beta} exceeds the dimension cap beta <= {MAX_HAMMING_BETA}")
    size = 1 << beta
    rows = [[1 if bin(i ^ j).count("1") == 1 else 0 for j in range(size)] for i in range(size)]
    return _int_matrix(rows, f"ham({beta})")


def bipartite_matrix() -> WeightMatrix:
    return _int_matrix([[0, 1], [1, 0]], "bipartite")


def coloring_matrix(q: int) -> WeightMatrix:
    """``R[i, j] = 1`` for ``i != j``: properly q-colored multigraphs."""
    if q < 2:
        raise DomainError("q must be >= 2")
    return _int_matrix([[0 if i == j else 1 for j in range(q)] for i in range(q)], f"coloring({q})")


def _exact_matmul(a, b):
    n = len(a)
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(a[i], cols[j])) for j in range(n)] for i in range(n)]


def ham_power(beta: int, alpha: int) -> WeightMatrix:
    """``Ham(beta) ** alpha``: clauses carrying an ordered sum of alpha universal variables."""
    if alpha < 1:
        raise DomainError("alpha must be >= 1")
    h = [list(row) for row in hamming_matrix(beta).exact]
    out = h
    for _ in range(alpha - 1):
        out = _exact_matmul(out, h)
    return WeightMatrix.from_exact(out, f"ham_power({beta},{alpha})")


def p_polynomial(alpha: int, beta: int) -> tuple[Fraction, ...]:
    """Coefficients (increasing powers) of the polynomial with ``P(Ham(beta))`` the
    weight-alpha XOR matrix, from the three-term recurrence."""
    if alpha < 0 or beta < 0:
        raise DomainError("alpha and beta must be nonnegative")
    if alpha > beta:
        raise DomainError(f"alpha={alpha} exceeds beta={beta}")
    prev = [Fraction(1)]
    if alpha == 0:
        return tuple(prev)
    cur = [Fraction(0), Fraction(1)]
    for a in range(alpha - 1):
        # (a + 2) P_{a+2} = X P_{a+1} - (beta - a) P_a
        nxt = [Fraction(0)] + cur
        for i, v in enumerate(prev):
            nxt[i] -= (beta - a) * v
        prev, cur = cur, [v / (a + 2) for v in nxt]
    return tuple(cur)


def poly_eval(coeffs: Sequence, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def ham_distinct(alpha: int, beta: int) -> WeightMatrix:
    """XOR matrix of clauses with exactly alpha distinct universal variables."""
    coeffs = p_polynomial(alpha, beta)
    h = [list(row) for row in hamming_matrix(beta).exact]
    size = len(h)
    acc = [[Fraction(0)] * size for _ in range(size)]
    for c in reversed(coeffs):
        acc = _exact_matmul(acc, h)
        for i in range(size):
            acc[i][i] += c
    for row in acc:
        for v in row:
            if v.denominator != 1 or v < 0:
                raise ArithmeticError("P(Ham) produced a non-count entry")
    return WeightMatrix.from_exact(acc, f"ham_distinct({alpha},{beta})")


def with_constant(R: WeightMatrix) -> WeightMatrix:
    """Block matrix ``[[R, R], [R, R]]`` adding a constant bit to every clause."""
    if R.exact is not None:
        rows = [list(row) + list(row) for row in R.exact]
        return WeightMatrix.from_exact(rows + rows, f"with_constant({R.provenance})")
    a = R.entries
    return WeightMatrix(np.block([[a, a], [a, a]]), f"with_constant({R.provenance})")


def matrix_from_multiset(E: Iterable[Sequence[int]], beta: int) -> WeightMatrix:
    """``R[i, j]`` = number of occurrences of ``bits(i) XOR bits(j)`` in the multiset E."""
    counts: dict[int, int] = {}
    for e in E:
        if len(e) != beta:
            raise DomainError(f"tuple {tuple(e)} has length {len(e)}, expected {beta}")
        idx = bit_index(e)
        counts[idx] = counts.get(idx, 0) + 1
    size = 1 << beta
    rows = [[counts.get(i ^ j, 0) for j in range(size)] for i in range(size)]
    return _int_matrix(rows, f"multiset(beta={beta},|E|={sum(counts.values())})")


def qxor_multiset(alpha: int, beta: int, variant: str) -> list[tuple[int, ...]]:
    """Right-hand-side multiset E for the quantified 2-XOR variants.

    ``plain``: ordered sums of alpha unit tuples (beta ** alpha elements).
    ``distinct``: tuples with exactly alpha ones.
    ``*with_constant``: each tuple extended by a trailing 0 and a trailing 1.
    """
    base_variant, constant = _split_variant(variant)
    if beta < 1 or alpha < 1:
        raise DomainError("alpha and beta must be >= 1")
    if base_variant == "plain":
        E = []
        for idx in itertools.product(range(beta), repeat=alpha):
            e = [0] * beta
            for k in idx:
                e[k] ^= 1
            E.append(tuple(e))
    else:
        if alpha > beta:
            raise DomainError(f"distinct variant needs alpha <= beta, got {alpha} > {beta}")
        E = [index_bits(j, beta) for j in range(1 << beta) if bin(j).count("1") == alpha]
    if constant:
        E = [e + (b,) for e in E for b in (0, 1)]
    return E


VARIANTS = ("plain", "distinct", "with_constant", "distinct_with_constant")


def _split_variant(variant: str) -> tuple[str, bool]:
    if variant not in VARIANTS:
        raise DomainError(f"unknown qxor variant {variant!r}; expected one of {VARIANTS}")
    return ("distinct" if variant.startswith("distinct") else "plain", variant.endswith("with_constant"))


def qxor_matrix(alpha: int, beta: int, variant: str) -> WeightMatrix:
    base_variant, constant = _split_variant(variant)
    R = ham_power(beta, alpha) if base_variant == "plain" else ham_distinct(alpha, beta)
    return with_constant(R) if constant else R


# ---------------------------------------------------------------------------
# Eigendecomposition


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOL, max_rotations: int | None = None):
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns ``(eigenvalues, Q)`` with eigenvalues sorted in decreasing order and
    ``a = Q diag(eigenvalues) Q^T``. Sweeps stop once the off-diagonal Frobenius
    norm drops below ``tol * ||a||_F``.
    """
    A = np.array(a, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    if max_rotations is None:
        max_rotations = 100 * n * n
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V
    rotations = 0
    while True:
        # direct sum over off-diagonal entries; ||A||^2 - ||diag||^2 cancels badly
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = A[p, r]
                if abs(apr) <= 1e-300:
                    continue
                if rotations >= max_rotations:
                    raise NonConvergenceError(
                        f"Jacobi eigensolver did not converge within {max_rotations} rotations"
                    )
                theta = (A[r, r] - A[p, p]) / (2.0 * apr)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colr = A[:, r].copy()
                A[:, p] = c * colp - s * colr
                A[:, r] = s * colp + c * colr
                rowp = A[p, :].copy()
                rowr = A[r, :].copy()
                A[p, :] = c * rowp - s * rowr
                A[r, :] = s * rowp + c * rowr
                A[p, r] = A[r, p] = 0.0
                vp = V[:, p].copy()
                vr = V[:, r].copy()
                V[:, p] = c * vp - s * vr
                V[:, r] = s * vp + c * vr
                rotations += 1
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True)
class SpectralSummary:
    """Everything the asymptotic formulas need from a weight matrix."""

    q: int
    delta: float
    c: int
    spectrum: tuple[float, ...]
    chi: tuple[float, ...]
    eigenvectors: np.ndarray = field(repr=False, compare=False)
    matrix: WeightMatrix = field(repr=False, compare=False)

    @property
    def block_size(self) -> int:
        return self.q // self.c

    @property
    def chi_at_one(self) -> float:
        return chi_eval(self, 1.0)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "delta": self.delta,
            "c": self.c,
            "spectrum": list(self.spectrum),
            "chi": list(self.chi),
            "block_size": self.block_size,
            "provenance": self.matrix.provenance,
        }


def cluster_radius(R: WeightMatrix) -> float:
    return CLUSTER_RTOL * (1.0 + float(np.max(R.entries)))


def spectral_summary(R: WeightMatrix, tol: float = JACOBI_TOL) -> SpectralSummary:
    if not np.any(R.entries):
        raise DomainError("weight matrix is zero")
    w, Q = jacobi_eigh(R.entries, tol=tol)
    if R.is_exact:
        # Integer eigenvalues of exact matrices lose their rounding noise.
        snap = SNAP_RTOL * (1.0 + float(np.max(R.entries)))
        near = np.round(w)
        w = np.where(np.abs(w - near) <= snap, near, w)
    delta = float(w[0])
    radius = cluster_radius(R)
    c = int(np.sum(np.abs(w - delta) <= radius))
    # Snap the dominant cluster onto one value so chi excludes exactly c copies.
    rest = w[c:]
    coeffs = np.array([1.0])
    for lam in rest:
        if lam == 0:
            continue
        coeffs = np.convolve(coeffs, [1.0, -lam / delta])
    return SpectralSummary(
        q=R.q,
        delta=delta,
        c=c,
        spectrum=tuple(float(x) for x in w),
        chi=tuple(float(x) for x in coeffs),
        eigenvectors=Q,
        matrix=R,
    )


def chi_eval(summary: SpectralSummary, x: float) -> float:
    """Evaluate chi at x as the product of its linear factors."""
    out = 1.0
    for lam in summary.spectrum[summary.c:]:
        out *= 1.0 - (lam / summary.delta) * x
    return out


def exact_row_sum(R: WeightMatrix) -> Fraction:
    """Common row sum of an exact matrix; equals delta for vertex-transitive R."""
    rows = R.exact_or_raise()
    sums = {sum(row, Fraction(0)) for row in rows}
    if len(sums) != 1:
        raise DomainError(f"matrix {R.provenance!r} has non-constant row sums")
    return sums.pop()


def char_poly_exact(rows: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Coefficients ``[1, a_1, ..., a_q]`` of ``det(lambda I - A)``.

    Exact similarity reduction to upper Hessenberg form followed by the
    standard row recurrence; O(q^3) rational operations.
    """
    n = len(rows)
    H = [list(map(Fraction, r)) for r in rows]
    for j in range(n - 2):
        piv = next((i for i in range(j + 1, n) if H[i][j] != 0), None)
        if piv is None:
            continue
        if piv != j + 1:
            H[piv], H[j + 1] = H[j + 1], H[piv]
            for row in H:
                row[piv], row[j + 1] = row[j + 1], row[piv]
        p = H[j + 1][j]
        for k in range(j + 2, n):
            u = H[k][j] / p
            if u == 0:
                continue
            rk, rp = H[k], H[j + 1]
            for c in range(n):
                rk[c] -= u * rp[c]
            for row in H:
                row[j + 1] += u * row[k]
    # polys[m] = det(lambda I - H[:m, :m]) as increasing-power coefficients
    polys = [[Fraction(1)]]
    for m in range(1, n + 1):
        h = H[m - 1][m - 1]
        prev = polys[-1]
        cur = [Fraction(0)] + prev  # lambda * p_{m-1}
        for d, v in enumerate(prev):
            cur[d] -= h * v
        prod = Fraction(1)
        for i in range(m - 1, 0, -1):
            prod *= H[i][i - 1]
            if prod == 0:
                break
            t = H[i - 1][m - 1] * prod
            for d, v in enumerate(polys[i - 1]):
                cur[d] -= t * v
        polys.append(cur)
    return polys[n][::-1]


def det_i_minus_xr_exact(R: WeightMatrix) -> list[Fraction]:
    """Coefficients of ``det(I - X R / delta)`` in increasing powers of X."""
    delta = exact_row_sum(R)
    scaled = [[v / delta for v in row] for row in R.exact_or_raise()]
    return char_poly_exact(scaled)


def chi_exact(R: WeightMatrix, c: int) -> list[Fraction]:
    """Exact chi: ``det(I - X R/delta) / (1 - X)^c`` by synthetic division."""
    poly = det_i_minus_xr_exact(R)
    for _ in range(c):
        # divide by (1 - X): quotient coefficients are prefix sums
        quot = []
        acc = Fraction(0)
        for v in poly[:-1]:
            acc += v
            quot.append(acc)
        if acc + poly[-1] != 0:
            raise ArithmeticError("(1 - X) does not divide det(I - X R/delta) the expected number of times")
        poly = quot
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


# ---------------------------------------------------------------------------
# Vertex-transitivity diagnostics


@dataclass(frozen=True)
class TransitivityReport:
    symmetric: bool
    constant_row_sums: bool
    constant_diagonal: bool
    transitive: bool | None  # None when q is too large for the exhaustive check

    @property
    def passed(self) -> bool:
        checks = [self.symmetric, self.constant_row_sums, self.constant_diagonal]
        if self.transitive is not None:
            checks.append(self.transitive)
        return all(checks)

    def to_json(self) -> dict:
        return {
            "symmetric": self.symmetric,
            "constant_row_sums": self.constant_row_sums,
            "constant_diagonal": self.constant_diagonal,
            "transitive": self.transitive,
            "passed": self.passed,
        }


def _find_automorphism(a: np.ndarray, target: int, atol: float) -> bool:
    """Search a weight-preserving permutation mapping vertex 0 to ``target``."""
    n = a.shape[0]
    perm = [-1] * n
    used = [False] * n
    perm[0] = target
    used[target] = True
    if not np.isclose(a[0, 0], a[target, target], atol=atol):
        return False

    def extend(i: int) -> bool:
        if i == n:
            return True
        for img in range(n):
            if used[img] or not np.isclose(a[i, i], a[img, img], atol=atol):
                continue
            if all(np.isclose(a[i, k], a[img, perm[k]], atol=atol) for k in range(i)):
                perm[i], used[img] = img, True
                if extend(i + 1):
                    return True
                perm[i], used[img] = -1, False
        return False

    return extend(1)


def validate_vertex_transitive(R: WeightMatrix, exhaustive_limit: int = 8) -> TransitivityReport:
    a = R.entries
    atol = 1e-12 * (1.0 + float(np.max(np.abs(a))))
    symmetric = bool(np.allclose(a, a.T, atol=atol, rtol=0))
    sums = a.sum(axis=1)
    constant_rows = bool(np.allclose(sums, sums[0], atol=atol * R.q, rtol=0))
    diag = np.diag(a)
    constant_diag = bool(np.allclose(diag, diag[0], atol=atol, rtol=0))
    transitive = None
    if R.q <= exhaustive_limit:
        transitive = symmetric and all(_find_automorphism(a, j, atol) for j in range(R.q))
    return TransitivityReport(symmetric, constant_rows, constant_diag, transitive)


def hamming_spectrum(beta: int) -> list[float]:
    """Eigenvalues ``beta - 2 i`` with multiplicity ``C(beta, i)``, decreasing."""
    return [float(beta - 2 * i) for i in range(beta + 1) for _ in range(comb(beta, i))]
