import json
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsigma import mc
from rsigma.errors import DomainError
from rsigma.oracle import (
    Multigraph,
    checker_count_exact,
    coloring_prob_exact,
    enumerate_multigraphs,
    qxor_prob_exact,
    total_count,
)
from rsigma.spectral import qxor_multiset


def test_sample_multigraph_is_deterministic():
    a = [mc.sample_multigraph(5, 4, mc.shard_rng(3)) for _ in range(1)]
    b = [mc.sample_multigraph(5, 4, mc.shard_rng(3)) for _ in range(1)]
    assert a == b
    assert mc.sample_multigraph(5, 4, mc.shard_rng(3)) != mc.sample_multigraph(5, 4, mc.shard_rng(4))


def test_shard_streams_differ():
    x = mc.shard_rng(1, 0).integers(0, 1 << 30, 8)
    y = mc.shard_rng(1, 1).integers(0, 1 << 30, 8)
    assert not np.array_equal(x, y)
    assert np.array_equal(x, mc.shard_rng(1, 0).integers(0, 1 << 30, 8))


def test_simple_rejection():
    rng = mc.shard_rng(0)
    for _ in range(20):
        assert mc.sample_multigraph(4, 3, rng, simple=True).is_simple
    with pytest.raises(DomainError):
        mc.sample_multigraph(2, 2, rng, simple=True, max_tries=50)


def test_pair_process_distribution():
    """Empirical multigraph frequencies for n = 2, m = 2 match kappa / total."""
    N = 10 ** 6
    pairs = mc.shard_rng(2024).integers(0, 2, size=(N, 2, 2))
    a = np.minimum(pairs[..., 0], pairs[..., 1])
    b = np.maximum(pairs[..., 0], pairs[..., 1])
    slot = a + b  # 0: loop at 0, 1: edge, 2: loop at 1
    key = np.sort(slot, axis=1)
    codes = key[:, 0] * 3 + key[:, 1]
    counts = Counter(codes.tolist())
    slots = [(0, 0), (0, 1), (1, 1)]
    z999 = 3.2905267314919255
    for G in enumerate_multigraphs(2, 2):
        es = sorted(slots.index(e) for e in G.edges())
        hits = counts.get(es[0] * 3 + es[1], 0)
        lo, hi = mc.wilson_interval(hits, N, z999)
        expect = float(G.kappa / total_count(2, 2))
        assert lo <= expect <= hi, (G, hits / N, expect)


def test_is_bipartite_examples():
    assert not mc.is_bipartite(Multigraph.from_edges(3, [(0, 1), (1, 2), (2, 0)]))
    assert mc.is_bipartite(Multigraph.from_edges(5, [(0, 1), (1, 2), (1, 3), (3, 4)]))
    assert not mc.is_bipartite(Multigraph.from_edges(2, [(1, 1)]))
    assert mc.is_bipartite(Multigraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 1)]))


def test_qxor_examples():
    assert mc.qxor_satisfiable(2, [(0, 1, 1)])
    assert not mc.qxor_satisfiable(2, [(0, 1, 1), (0, 1, 0)])
    assert not mc.qxor_satisfiable(1, [(0, 0, 1)])
    assert mc.qxor_satisfiable(1, [(0, 0, 0)])


def test_coloring_examples():
    rng = mc.shard_rng(5)
    assert all(mc.sample_and_check_coloring(4, 0, 3, rng) for _ in range(50))
    assert not mc.is_proper_coloring(Multigraph.from_edges(2, [(0, 0)]), [0, 1])
    assert coloring_prob_exact(2, 2, 1) == Fraction(1, 4)


def test_sample_and_check_qxor_runs():
    rng = mc.shard_rng(9)
    out = [mc.sample_and_check_qxor(30, 5, 1, 2, "with_constant", rng) for _ in range(200)]
    assert 0 < sum(out) < 200
    with pytest.raises(DomainError):
        mc.sample_and_check_qxor(3, 1, 1, 1, "bogus", rng)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10), st.integers(1, 3), st.data())
def test_compiled_checker_matches_reference(n, m, width, data):
    f1 = np.array(data.draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m)), dtype=np.int64)
    f2 = np.array(data.draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m)), dtype=np.int64)
    rhs = np.array(data.draw(st.lists(st.integers(0, (1 << width) - 1), min_size=m, max_size=m)), dtype=np.int64)
    ws = mc._Workspace(n)
    out = np.empty(2, dtype=np.bool_)
    ones = np.ones(m, dtype=np.int64)
    mc._batch_xor(n, np.stack([f1, f1]), np.stack([f2, f2]), np.stack([rhs, ones]), out,
                  ws.parent, ws.pot, ws.stamp, 0)
    clauses = list(zip(f1.tolist(), f2.tolist(), rhs.tolist()))
    assert out[0] == mc.qxor_satisfiable(n, clauses)
    G = Multigraph.from_edges(n, list(zip(f1.tolist(), f2.tolist())))
    assert out[1] == mc.is_bipartite(G)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5000), st.integers(1, 5000))
def test_wilson_properties(successes, trials):
    successes = min(successes, trials)
    lo, hi = mc.wilson_interval(successes, trials)
    p = successes / trials
    assert 0 <= lo <= p <= hi <= 1
    lo4, hi4 = mc.wilson_interval(4 * successes, 4 * trials)
    assert hi4 - lo4 <= hi - lo + 1e-12


def test_estimate_always():
    e = mc.estimate(mc.SampleConfig(n=10, m=3, samples=1000, problem="always"))
    assert e.p_hat == 1 and e.ci_high == 1 and e.ci_low > 0.99


@pytest.mark.parametrize(
    "cfg,exact",
    [
        (dict(n=2, m=1, problem="bipartite"), 0.5),
        (dict(n=2, m=1, problem="coloring", q=2), 0.25),
    ],
)
def test_estimate_small_limits(cfg, exact):
    e = mc.estimate(mc.SampleConfig(samples=200_000, seed=1, **cfg))
    assert e.ci_low <= exact <= e.ci_high or abs(e.p_hat - exact) < 3 * (e.ci_high - e.ci_low)


def test_seed_determinism_and_sharding():
    cfg = mc.SampleConfig(n=300, m=100, samples=5000, seed=42, shards=4)
    a = mc.estimate(cfg)
    b = mc.estimate(cfg)
    assert a == b
    c = mc.estimate(cfg, workers=2)
    assert c == a
    d = mc.estimate(mc.SampleConfig(n=300, m=100, samples=5000, seed=43, shards=4))
    assert d.successes != a.successes or d.seed != a.seed


def test_simple_mode_conditions_on_simple_graphs():
    e = mc.estimate(mc.SampleConfig(n=3, m=3, samples=500, problem="bipartite", simple=True))
    assert e.p_hat == 0
    e = mc.estimate(mc.SampleConfig(n=4, m=2, samples=2000, problem="bipartite", simple=True))
    assert e.p_hat == 1


@pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (3, 3), (4, 2), (4, 4)])
def test_checker_oracle_agreement(n, m):
    samples = 100_000
    p = checker_count_exact(mc.is_bipartite, n, m).value / total_count(n, m)
    e = mc.estimate(mc.SampleConfig(n=n, m=m, samples=samples, seed=n * 10 + m))
    assert abs(e.p_hat - float(p)) <= 4 * math.sqrt(float(p) * (1 - float(p)) / samples) + 1e-12
    pc = coloring_prob_exact(3, n, m)
    ec = mc.estimate(mc.SampleConfig(n=n, m=m, samples=samples, seed=7, problem="coloring", q=3))
    assert abs(ec.p_hat - float(pc)) <= 4 * math.sqrt(float(pc) * (1 - float(pc)) / samples) + 1e-12


@pytest.mark.parametrize("variant", ["plain", "with_constant"])
def test_qxor_estimate_matches_oracle(variant):
    n, m, samples = 3, 3, 100_000
    p = float(qxor_prob_exact(qxor_multiset(1, 2, variant), 2, n, m))
    e = mc.estimate(mc.SampleConfig(n=n, m=m, samples=samples, seed=3, problem="qxor", beta=2, variant=variant))
    assert abs(e.p_hat - p) <= 4 * math.sqrt(p * (1 - p) / samples)


def test_config_validation():
    with pytest.raises(DomainError):
        mc.SampleConfig(n=5, m=1, samples=0)
    with pytest.raises(DomainError):
        mc.SampleConfig(n=5, m=1, samples=10, problem="nope")
    with pytest.raises(DomainError):
        mc.SampleConfig(n=5, m=1, samples=10, problem="coloring", q=1)


def test_estimate_json():
    e = mc.estimate(mc.SampleConfig(n=20, m=5, samples=100, seed=8))
    obj = json.loads(json.dumps(e.to_json()))
    assert set(obj) >= {"p_hat", "ci_low", "ci_high", "samples", "seed", "config"}
    assert obj["ci_low"] <= obj["p_hat"] <= obj["ci_high"]
    assert mc.SampleConfig(**obj["config"]) == mc.SampleConfig(n=20, m=5, samples=100, seed=8)
