"""Routing metrics, context-token and access-cost accounting, paired bootstrap."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    CostModel,
    DatasetError,
    GroundTruthLabel,
    MemoryCorpus,
    RouteDecision,
    StoreSet,
    access_cost,
    count_tokens,
)

CSV_COLUMNS = (
    "policy",
    "coverage",
    "exact_match",
    "waste",
    "mean_tokens",
    "mean_access_cost",
    "qa_accuracy",
    "n",
)


@dataclass(frozen=True)
class RoutingMetrics:
    coverage: float
    exact_match: float
    waste: float
    mean_tokens: float
    mean_access_cost: float
    n: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BootstrapResult:
    delta: float
    ci_low: float
    ci_high: float
    iterations: int
    significant: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _paired(
    labels: Iterable[GroundTruthLabel], decisions: Iterable[RouteDecision]
) -> list[tuple[StoreSet, StoreSet]]:
    by_id = {lab.query_id: lab.stores for lab in labels}
    chosen = {d.query_id: d.stores for d in decisions}
    if not by_id:
        raise DatasetError("no labeled queries")
    if by_id.keys() != chosen.keys():
        missing = sorted(by_id.keys() ^ chosen.keys())[:5]
        raise DatasetError(f"label/decision query ids differ, e.g. {missing}")
    return [(by_id[qid], chosen[qid]) for qid in sorted(by_id)]


def coverage(labels: Iterable[GroundTruthLabel], decisions: Iterable[RouteDecision]) -> float:
    pairs = _paired(labels, decisions)
    return sum(g <= g_hat for g, g_hat in pairs) / len(pairs)


def exact_match(labels: Iterable[GroundTruthLabel], decisions: Iterable[RouteDecision]) -> float:
    pairs = _paired(labels, decisions)
    return sum(g == g_hat for g, g_hat in pairs) / len(pairs)


def waste(labels: Iterable[GroundTruthLabel], decisions: Iterable[RouteDecision]) -> float:
    pairs = _paired(labels, decisions)
    return sum(len(g_hat - g) for g, g_hat in pairs) / len(pairs)


def context_tokens(decision: RouteDecision, corpus: MemoryCorpus, tokenizer: str = "whitespace") -> int:
    """Tokens of retrieved content only; store headers and prompt text are not counted."""
    return sum(
        count_tokens(item.text, tokenizer)
        for store in decision.stores
        for item in corpus.store_items(store)
    )


def routing_metrics(
    labels: Sequence[GroundTruthLabel],
    decisions: Sequence[RouteDecision],
    corpora: Mapping[str, MemoryCorpus] | None = None,
    cost: CostModel | None = None,
) -> RoutingMetrics:
    cost = cost or CostModel()
    pairs = _paired(labels, decisions)
    n = len(pairs)
    if corpora is None:
        mean_tokens = 0.0
    else:
        mean_tokens = (
            sum(context_tokens(d, corpora[d.query_id], cost.tokenizer) for d in decisions) / n
        )
    return RoutingMetrics(
        coverage=sum(g <= h for g, h in pairs) / n,
        exact_match=sum(g == h for g, h in pairs) / n,
        waste=sum(len(h - g) for g, h in pairs) / n,
        mean_tokens=mean_tokens,
        mean_access_cost=sum(access_cost(d.stores, cost) for d in decisions) / n,
        n=n,
    )


def bootstrap_diff(
    outcomes_a: Sequence[int | bool],
    outcomes_b: Sequence[int | bool],
    iterations: int = 1000,
    seed: int = 0,
    confidence: float = 0.95,
) -> BootstrapResult:
    """Paired percentile bootstrap for the difference in mean correctness (a - b).

    Query indices are resampled jointly for both policies, so per-query
    pairing is preserved.
    """
    a = np.asarray(outcomes_a, dtype=float)
    b = np.asarray(outcomes_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DatasetError("bootstrap needs two outcome vectors of equal length")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if a.size == 0:
        raise DatasetError("bootstrap needs at least one paired outcome")
    diffs = a - b
    delta = float(diffs.mean())
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, diffs.size, size=(iterations, diffs.size))
    means = diffs[idx].mean(axis=1)
    tail = (1.0 - confidence) / 2.0 * 100.0
    lo, hi = np.percentile(means, [tail, 100.0 - tail])
    # percentile intervals can miss the point estimate on tiny samples
    lo, hi = min(float(lo), delta), max(float(hi), delta)
    return BootstrapResult(
        delta=delta,
        ci_low=lo,
        ci_high=hi,
        iterations=iterations,
        significant=bool(lo > 0.0 or hi < 0.0),
    )
