import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from storeroute.core import (
    DatasetError,
    GroundTruthLabel,
    MemoryCorpus,
    MemoryItem,
    RouteDecision,
    StoreId,
    StoreSet,
)
from storeroute.metrics import (
    bootstrap_diff,
    context_tokens,
    coverage,
    exact_match,
    routing_metrics,
    waste,
)

S = StoreId


def naive(g: set, h: set) -> tuple[int, int, int]:
    covered = int(all(x in h for x in g))
    exact = int(sorted(g) == sorted(h))
    extra = len([x for x in h if x not in g])
    return covered, exact, extra


def test_single_pair_metrics_match_naive_reference_exhaustively():
    for a, b in itertools.product(range(16), range(16)):
        g, h = StoreSet.from_mask(a), StoreSet.from_mask(b)
        labels = [GroundTruthLabel("q", g)] if g else None
        if labels is None:
            continue
        decisions = [RouteDecision("q", h, "t")]
        want = naive(set(g), set(h))
        assert (coverage(labels, decisions), exact_match(labels, decisions), waste(labels, decisions)) == want


@pytest.mark.parametrize(
    "g, h, cov, em, w",
    [
        ({S.SUMMARY}, {S.SUMMARY}, 1, 1, 0),
        ({S.SUMMARY, S.LTM}, {S.SUMMARY}, 0, 0, 0),
        ({S.SUMMARY}, {S.STM, S.SUMMARY, S.LTM, S.EPISODIC}, 1, 0, 3),
    ],
)
def test_metric_examples(g, h, cov, em, w):
    labels = [GroundTruthLabel("q", StoreSet(g))]
    decisions = [RouteDecision("q", StoreSet(h), "t")]
    m = routing_metrics(labels, decisions)
    assert (m.coverage, m.exact_match, m.waste) == (cov, em, w)


@given(st.lists(st.tuples(st.integers(1, 15), st.integers(0, 15)), min_size=1, max_size=30))
def test_metrics_are_means_of_naive_values(pairs):
    labels = [GroundTruthLabel(f"q{i}", StoreSet.from_mask(g)) for i, (g, _) in enumerate(pairs)]
    decisions = [RouteDecision(f"q{i}", StoreSet.from_mask(h), "t") for i, (_, h) in enumerate(pairs)]
    ref = [naive(set(StoreSet.from_mask(g)), set(StoreSet.from_mask(h))) for g, h in pairs]
    m = routing_metrics(labels, decisions)
    n = len(pairs)
    assert m.coverage == pytest.approx(sum(r[0] for r in ref) / n)
    assert m.exact_match == pytest.approx(sum(r[1] for r in ref) / n)
    assert m.waste == pytest.approx(sum(r[2] for r in ref) / n)
    assert 0 <= m.exact_match <= m.coverage <= 1
    assert m.n == n


def test_mismatched_ids_raise():
    labels = [GroundTruthLabel("a", StoreSet.full())]
    with pytest.raises(DatasetError):
        coverage(labels, [RouteDecision("b", StoreSet.full(), "t")])
    with pytest.raises(DatasetError):
        coverage([], [])


def test_context_tokens_and_access_cost():
    corpus = MemoryCorpus(
        {
            S.STM: (MemoryItem(S.STM, "one two three"),),
            S.SUMMARY: (MemoryItem(S.SUMMARY, "four five"),),
            S.LTM: (),
            S.EPISODIC: (MemoryItem(S.EPISODIC, "six"),),
        }
    )
    d = RouteDecision("q", StoreSet.of(S.STM, S.EPISODIC), "t")
    assert context_tokens(d, corpus) == 4
    assert context_tokens(RouteDecision("q", StoreSet.empty(), "t"), corpus) == 0
    m = routing_metrics([GroundTruthLabel("q", StoreSet.of(S.STM))], [d], {"q": corpus})
    assert m.mean_tokens == 4 and m.mean_access_cost == 6


# -- bootstrap ----------------------------------------------------------------


def test_identical_outcomes_give_zero_interval():
    a = [1, 0, 1, 1, 0] * 20
    r = bootstrap_diff(a, a, iterations=500, seed=3)
    assert r.delta == 0 and r.ci_low == 0 and r.ci_high == 0
    assert not r.significant


def test_bootstrap_reproducible_per_seed():
    rng = random.Random(0)
    a = [rng.random() < 0.7 for _ in range(200)]
    b = [rng.random() < 0.6 for _ in range(200)]
    assert bootstrap_diff(a, b, seed=5) == bootstrap_diff(a, b, seed=5)


def test_bootstrap_interval_contains_delta():
    for n in range(1, 6):
        for bits in itertools.product([0, 1], repeat=n):
            r = bootstrap_diff(list(bits), [0] * n, iterations=50, seed=1)
            assert r.ci_low <= r.delta <= r.ci_high


def exact_bootstrap_quantiles(m: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Quantiles of the exact bootstrap distribution of the mean of n values with m ones.

    Resampling n of n with replacement makes the number of ones Binomial(n, m/n).
    """
    p = m / n
    pmf = [math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)]
    cdf = list(itertools.accumulate(pmf))
    tail = (1 - confidence) / 2
    lo = next(k for k, c in enumerate(cdf) if c >= tail) / n
    hi = next(k for k, c in enumerate(cdf) if c >= 1 - tail) / n
    return lo, hi


def sign_flip_p_value(m: int) -> float:
    """Exact two-sided paired permutation p-value for m one-sided discordant pairs."""
    return min(1.0, 2 * 0.5**m)


@pytest.mark.parametrize("flips", [2, 4, 10])
def test_bootstrap_agrees_with_exact_bootstrap_distribution(flips):
    n = 100
    a = [1] * flips + [0] * (n - flips)
    b = [0] * n
    r = bootstrap_diff(a, b, iterations=1000, seed=0)
    lo, hi = exact_bootstrap_quantiles(flips, n)
    assert r.delta == flips / n
    assert r.significant == (lo > 0)
    # one grid step of Monte Carlo slack on each end
    assert abs(r.ci_low - lo) <= 1 / n + 1e-9
    assert abs(r.ci_high - hi) <= 1 / n + 1e-9


@pytest.mark.parametrize("flips, agrees", [(2, True), (4, False), (10, True)])
def test_bootstrap_versus_exact_permutation(flips, agrees):
    # the percentile bootstrap is liberal at very few discordant pairs
    n = 100
    r = bootstrap_diff([1] * flips + [0] * (n - flips), [0] * n, iterations=1000, seed=0)
    perm_significant = sign_flip_p_value(flips) < 0.05
    assert (r.significant == perm_significant) == agrees


def test_bootstrap_null_false_positive_rate():
    rng = np.random.default_rng(123)
    hits = 0
    trials = 200
    for t in range(trials):
        a = rng.random(150) < 0.8
        b = rng.random(150) < 0.8
        hits += bootstrap_diff(a, b, iterations=1000, seed=t).significant
    assert hits / trials <= 0.07


def test_bootstrap_input_errors():
    with pytest.raises(DatasetError):
        bootstrap_diff([1, 0], [1])
    with pytest.raises(DatasetError):
        bootstrap_diff([], [])
    with pytest.raises(ValueError):
        bootstrap_diff([1], [0], iterations=0)
