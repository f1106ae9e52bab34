"""Monte Carlo estimation of bipartiteness, quantified 2-XOR satisfiability and
proper-coloring probabilities.

Multigraphs are drawn by the pair-sequence process: ``m`` independent uniform
ordered pairs of vertices. Each shard of an estimate draws from its own Philox
stream keyed by ``(seed, shard)``, so results do not depend on how shards are
scheduled across workers.

The per-sample checks on large batches run in numba-compiled loops; the
``Multigraph``-level functions are the readable reference versions and are used
by the tests to cross-check the compiled ones.
"""
from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .errors import DomainError
from .oracle import Multigraph
from .spectral import VARIANTS, bit_index, qxor_multiset

Z95 = 1.959963984540054
PROBLEMS = ("bipartite", "qxor", "coloring", "always")
CHUNK_INTS = 4_000_000


def shard_rng(seed: int, shard: int = 0) -> np.random.Generator:
    """Counter-based generator whose stream depends only on ``(seed, shard)``."""
    ss = np.random.SeedSequence(entropy=int(seed) % (1 << 64), spawn_key=(int(shard),))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Reference checkers on Multigraph objects


def sample_multigraph(n: int, m: int, rng: np.random.Generator, simple: bool = False,
                      max_tries: int = 100_000) -> Multigraph:
    if n < 1:
        raise DomainError("n must be >= 1")
    for _ in range(max_tries):
        pairs = rng.integers(0, n, size=(m, 2))
        G = Multigraph.from_edges(n, [tuple(p) for p in pairs.tolist()])
        if not simple or G.is_simple:
            return G
    raise DomainError(f"no simple multigraph after {max_tries} draws")


def is_bipartite(G: Multigraph) -> bool:
    """Breadth-first 2-coloring; a loop is an odd cycle."""
    adj: list[list[int]] = [[] for _ in range(G.n)]
    for (a, b), _ in G.multiplicities:
        if a == b:
            return False
        adj[a].append(b)
        adj[b].append(a)
    color = [-1] * G.n
    for s in range(G.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if color[w] < 0:
                    color[w] = color[v] ^ 1
                    queue.append(w)
                elif color[w] == color[v]:
                    return False
    return True


def proper_colorings(G: Multigraph, q: int) -> int:
    """Number of proper q-colorings, by brute force (small graphs only)."""
    import itertools

    edges = [e for e, _ in G.multiplicities]
    return sum(
        all(c[a] != c[b] for a, b in edges) for c in itertools.product(range(q), repeat=G.n)
    )


def is_proper_coloring(G: Multigraph, colors) -> bool:
    return all(colors[a] != colors[b] for (a, b), _ in G.multiplicities)


def qxor_satisfiable(n: int, clauses) -> bool:
    """Decide ``forall x exists y: AND_i y_f1 XOR y_f2 = e_i . (x, 1)``.

    ``clauses`` holds ``(f1, f2, e)`` with ``e`` a bit tuple packed into an int.
    Satisfiable iff each vertex gets a bit tuple ``eta`` with ``eta_f1 XOR eta_f2 = e``
    on every clause: labels are propagated along a spanning forest, then every
    clause (tree or not, loops included) is checked.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for f1, f2, e in clauses:
        adj[f1].append((f2, e))
        adj[f2].append((f1, e))
    label = [-1] * n
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = 0
        stack = [s]
        while stack:
            v = stack.pop()
            for w, e in adj[v]:
                if label[w] < 0:
                    label[w] = label[v] ^ e
                    stack.append(w)
    return all(label[f1] ^ label[f2] == e for f1, f2, e in clauses)


def qxor_values(alpha: int, beta: int, variant: str) -> np.ndarray:
    """The multiset E packed as integers (bit k of the tuple is bit k of the int)."""
    E = qxor_multiset(alpha, beta, variant)
    if len(E[0]) > 62:
        raise DomainError("bit tuples longer than 62 do not fit a machine word")
    return np.array([bit_index(e) for e in E], dtype=np.int64)


def sample_formula(n: int, m: int, values: np.ndarray, rng: np.random.Generator):
    pairs = rng.integers(0, n, size=(m, 2))
    es = values[rng.integers(0, len(values), size=m)]
    return [(int(a), int(b), int(e)) for (a, b), e in zip(pairs, es)]


def sample_and_check_qxor(n: int, m: int, alpha: int, beta: int, variant: str,
                          rng: np.random.Generator) -> bool:
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    return qxor_satisfiable(n, sample_formula(n, m, qxor_values(alpha, beta, variant), rng))


def sample_and_check_coloring(n: int, m: int, q: int, rng: np.random.Generator) -> bool:
    if q < 2:
        raise DomainError("q must be >= 2")
    G = sample_multigraph(n, m, rng)
    colors = rng.integers(0, q, size=n)
    return is_proper_coloring(G, colors)


# ---------------------------------------------------------------------------
# Compiled batch kernels


@numba.njit(cache=True)
def _find(parent, pot, x):
    # Returns the root; pot[x] becomes the XOR potential from x to the root.
    root = x
    acc = 0
    while parent[root] != root:
        acc ^= pot[root]
        root = parent[root]
    # path compression
    cur = x
    cur_acc = acc
    while parent[cur] != cur:
        nxt = parent[cur]
        nxt_acc = cur_acc ^ pot[cur]
        parent[cur] = root
        pot[cur] = cur_acc
        cur = nxt
        cur_acc = nxt_acc
    return root


@numba.njit(cache=True)
def _xor_consistent(n, f1, f2, rhs, parent, pot, stamp, tag):
    """Union-find with XOR potentials; False on the first contradictory clause.

    ``stamp``/``tag`` lazily reset the arrays so a sample costs O(m), not O(n).
    """
    for i in range(f1.shape[0]):
        a = f1[i]
        b = f2[i]
        for v in (a, b):
            if stamp[v] != tag:
                stamp[v] = tag
                parent[v] = v
                pot[v] = 0
        ra = _find(parent, pot, a)
        pa = pot[a] if a != ra else 0
        rb = _find(parent, pot, b)
        pb = pot[b] if b != rb else 0
        if ra == rb:
            if (pa ^ pb) != rhs[i]:
                return False
        else:
            parent[ra] = rb
            pot[ra] = pa ^ pb ^ rhs[i]
    return True


@numba.njit(cache=True)
def _batch_xor(n, f1, f2, rhs, out, parent, pot, stamp, tag0):
    for s in range(f1.shape[0]):
        out[s] = _xor_consistent(n, f1[s], f2[s], rhs[s], parent, pot, stamp, tag0 + s)
    return tag0 + f1.shape[0]


@numba.njit(cache=True)
def _batch_simple(n, f1, f2, out):
    for s in range(f1.shape[0]):
        m = f1.shape[1]
        keys = np.empty(m, dtype=np.int64)
        ok = True
        for i in range(m):
            a = f1[s, i]
            b = f2[s, i]
            if a == b:
                ok = False
                break
            keys[i] = min(a, b) * n + max(a, b)
        if ok and m > 1:
            keys.sort()
            for i in range(1, m):
                if keys[i] == keys[i - 1]:
                    ok = False
                    break
        out[s] = ok


class _Workspace:
    def __init__(self, n: int):
        self.parent = np.zeros(n, dtype=np.int64)
        self.pot = np.zeros(n, dtype=np.int64)
        self.stamp = np.full(n, -1, dtype=np.int64)
        self.tag = 0


def _chunk_size(m: int, n: int) -> int:
    return max(1, CHUNK_INTS // max(1, 2 * m + n))


# ---------------------------------------------------------------------------
# Estimation


@dataclass(frozen=True)
class SampleConfig:
    n: int
    m: int
    samples: int
    seed: int = 0
    problem: str = "bipartite"
    alpha: int = 1
    beta: int = 1
    variant: str = "plain"
    q: int = 2
    simple: bool = False
    shards: int = 1

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise DomainError(f"unknown problem {self.problem!r}; expected one of {PROBLEMS}")
        if self.n < 1 or self.m < 0:
            raise DomainError("need n >= 1 and m >= 0")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        if self.shards < 1:
            raise DomainError("shards must be >= 1")
        if self.problem == "coloring" and self.q < 2:
            raise DomainError("q must be >= 2")
        if self.problem == "qxor" and self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    ci_low: float
    ci_high: float
    samples: int
    successes: int
    seed: int
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials < 1:
        raise DomainError("need at least one trial")
    p = successes / trials
    z2 = z * z / trials
    center = (p + z2 / 2) / (1 + z2)
    half = z / (1 + z2) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials))
    return max(0.0, min(p, center - half)), min(1.0, max(p, center + half))


def _run_batch(cfg: SampleConfig, rng: np.random.Generator, count: int, ws: _Workspace,
               values: np.ndarray | None) -> tuple[int, int]:
    """``count`` accepted samples; returns ``(successes, accepted)``."""
    n, m = cfg.n, cfg.m
    successes = accepted = 0
    step = _chunk_size(m, n)
    while accepted < count:
        b = min(step, count - accepted)
        if cfg.problem == "always":
            successes += b
            accepted += b
            continue
        f1 = rng.integers(0, n, size=(b, m), dtype=np.int64)
        f2 = rng.integers(0, n, size=(b, m), dtype=np.int64)
        if cfg.problem == "coloring":
            colors = rng.integers(0, cfg.q, size=(b, n), dtype=np.int64)
        elif cfg.problem == "qxor":
            rhs = values[rng.integers(0, len(values), size=(b, m))]
        else:
            rhs = np.ones((b, m), dtype=np.int64)
        keep = np.ones(b, dtype=np.bool_)
        if cfg.simple:
            _batch_simple(n, f1, f2, keep)
        if not keep.any():
            continue
        f1, f2 = f1[keep], f2[keep]
        if cfg.problem == "coloring":
            colors = colors[keep]
            rows = np.arange(f1.shape[0])[:, None]
            ok = np.all(colors[rows, f1] != colors[rows, f2], axis=1)
        else:
            rhs = rhs[keep]
            ok = np.empty(f1.shape[0], dtype=np.bool_)
            ws.tag = _batch_xor(n, f1, f2, rhs, ok, ws.parent, ws.pot, ws.stamp, ws.tag)
        take = min(len(ok), count - accepted)
        successes += int(ok[:take].sum())
        accepted += take
    return successes, accepted


def _shard_counts(samples: int, shards: int) -> list[int]:
    base, extra = divmod(samples, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def run_shard(cfg: SampleConfig, shard: int) -> tuple[int, int]:
    count = _shard_counts(cfg.samples, cfg.shards)[shard]
    if count == 0:
        return 0, 0
    values = qxor_values(cfg.alpha, cfg.beta, cfg.variant) if cfg.problem == "qxor" else None
    return _run_batch(cfg, shard_rng(cfg.seed, shard), count, _Workspace(cfg.n), values)


def estimate(config: SampleConfig, workers: int = 1) -> Estimate:
    """Success frequency with a Wilson 95% interval, reproducible per seed and shard count."""
    if workers > 1 and config.shards > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_shard, [config] * config.shards, range(config.shards)))
    else:
        parts = [run_shard(config, k) for k in range(config.shards)]
    successes = sum(s for s, _ in parts)
    trials = sum(t for _, t in parts)
    lo, hi = wilson_interval(successes, trials)
    return Estimate(successes / trials, lo, hi, trials, successes, config.seed, config.to_json())
