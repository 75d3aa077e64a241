"""Routing policies: uniform, oracle, fixed subsets, linguistic rules, hybrid, cost-sensitive."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Protocol

from .core import (
    STORES,
    ConfigError,
    CostModel,
    DatasetError,
    GroundTruthLabel,
    RouteDecision,
    StoreId,
    StoreSet,
    access_cost,
)
from .signals import DEFAULT_LEXICON, Lexicon, extract_signals, similarity

_S = StoreId
FALLBACK = StoreSet.of(_S.SUMMARY, _S.LTM)
DEFAULT_SIMILARITY_THRESHOLD = 0.15

POLICY_KINDS = ("uniform", "oracle", "fixed", "rule_based", "hybrid", "cost_sensitive")

# provenance vocabulary, per policy
HYBRID_PROVENANCE = (
    "quantity-rule",
    "temporal-rule",
    "multi-hop-rule",
    "current-session-rule",
    "fact-lookup-rule",
    "similarity-tiebreak",
    "fallback",
)
RULE_PROVENANCE = ("current-session", "possessive-present", "possessive-past", "past-tense", "default")


class _HasText(Protocol):
    id: str
    text: str


@dataclass(frozen=True)
class AccuracyModel:
    """Coverage-plus-noise estimate of answer accuracy for a store set."""

    alpha: float = 0.9
    beta: float = 0.1
    gamma: float = 0.02

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= self.alpha <= 1.0:
            raise ConfigError("accuracy model needs 0 <= beta <= alpha <= 1")
        if self.gamma < 0:
            raise ConfigError("gamma must be non-negative")

    def estimate(self, selected: StoreSet, required: StoreSet) -> float:
        if not required <= selected:
            return self.beta
        value = self.alpha - self.gamma * len(selected - required)
        return min(1.0, max(self.beta, value))


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    name: str = ""
    fixed_stores: StoreSet = StoreSet.empty()
    lam: float = 0.0
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    use_similarity: bool = True
    label_source: str = "oracle"

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind: {self.kind!r}")
        if self.lam < 0:
            raise ConfigError("lambda must be non-negative")
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ConfigError("similarity threshold must lie in [0, 1]")
        if self.label_source not in ("oracle", "hybrid"):
            raise ConfigError(f"unknown label source: {self.label_source!r}")


def parse_policy(text: str) -> PolicySpec:
    """Parse a policy string.

    Accepted forms: ``uniform``, ``oracle``, ``none``, ``rules``, ``semantic``
    (hybrid rules without the similarity tiebreak), ``hybrid`` or
    ``hybrid:0.2``, ``cost:0.05`` or ``cost:0.05:hybrid``, and '+'-joined store
    lists such as ``stm+sum+ltm`` or ``summary``.
    """
    name = text.strip()
    head, _, rest = name.partition(":")
    head = head.lower()
    try:
        if head == "uniform" and not rest:
            return PolicySpec("uniform", name)
        if head == "oracle" and not rest:
            return PolicySpec("oracle", name)
        if head == "none" and not rest:
            return PolicySpec("fixed", name, fixed_stores=StoreSet.empty())
        if head in ("rules", "rule_based") and not rest:
            return PolicySpec("rule_based", name)
        if head == "semantic" and not rest:
            return PolicySpec("hybrid", name, use_similarity=False)
        if head == "hybrid":
            if rest:
                return PolicySpec("hybrid", name, similarity_threshold=float(rest))
            return PolicySpec("hybrid", name)
        if head == "cost":
            lam_text, _, source = rest.partition(":")
            if not lam_text:
                raise ConfigError("cost policy needs a lambda, e.g. cost:0.05")
            return PolicySpec("cost_sensitive", name, lam=float(lam_text), label_source=source or "oracle")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad policy parameter in {name!r}: {exc}") from None
    if rest:
        raise ConfigError(f"unknown policy: {name!r}")
    return PolicySpec("fixed", name, fixed_stores=StoreSet.parse(head))


# the twelve store-selection policies of the full comparison table
BENCH_POLICIES = (
    "oracle",
    "stm+sum+ltm",
    "uniform",
    "summary+ltm",
    "hybrid",
    "ltm",
    "ltm+episodic",
    "stm+summary",
    "summary",
    "episodic",
    "stm",
    "none",
)


def route_uniform(q: _HasText) -> RouteDecision:
    return RouteDecision(q.id, StoreSet.full(), "uniform")


def route_oracle(q: _HasText, label: GroundTruthLabel) -> RouteDecision:
    if label.query_id != q.id:
        raise DatasetError(f"label {label.query_id!r} does not belong to query {q.id!r}")
    return RouteDecision(q.id, label.stores, "oracle")


def route_fixed(q: _HasText, subset: StoreSet) -> RouteDecision:
    return RouteDecision(q.id, subset, "fixed")


def route_rule_based(q: _HasText, lexicon: Lexicon = DEFAULT_LEXICON) -> RouteDecision:
    """Pronoun/tense router; never looks at the semantic cue families."""
    sig = extract_signals(q.text, lexicon)
    if sig.current_session:
        return RouteDecision(q.id, StoreSet.of(_S.STM), "current-session")
    if sig.possessive_pronoun and not sig.past_tense:
        return RouteDecision(q.id, StoreSet.of(_S.SUMMARY), "possessive-present")
    if sig.possessive_pronoun:
        # a past-tense question about the user's own attributes needs profile and history
        return RouteDecision(q.id, StoreSet.of(_S.SUMMARY, _S.LTM), "possessive-past")
    if sig.past_tense:
        return RouteDecision(q.id, StoreSet.of(_S.LTM), "past-tense")
    return RouteDecision(q.id, StoreSet.of(_S.SUMMARY), "default")


def route_hybrid(
    q: _HasText,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
    lexicon: Lexicon = DEFAULT_LEXICON,
    use_similarity: bool = True,
) -> RouteDecision:
    sig = extract_signals(q.text, lexicon)
    if sig.quantity:
        return RouteDecision(q.id, StoreSet.of(_S.LTM, _S.EPISODIC), "quantity-rule")
    if sig.temporal:
        return RouteDecision(q.id, StoreSet.of(_S.LTM, _S.EPISODIC), "temporal-rule")
    if sig.multi_hop:
        return RouteDecision(q.id, StoreSet.of(_S.SUMMARY, _S.LTM), "multi-hop-rule")
    if sig.current_session:
        return RouteDecision(q.id, StoreSet.of(_S.STM), "current-session-rule")
    if sig.fact_lookup:
        return RouteDecision(q.id, StoreSet.of(_S.SUMMARY), "fact-lookup-rule")
    if use_similarity:
        scores = similarity(q.text, lexicon.descriptors, lexicon.embedder)
        # max() keeps the first maximal store, i.e. StoreId order breaks ties
        best = max(STORES, key=lambda s: scores[s])
        if scores[best] >= threshold:
            return RouteDecision(q.id, FALLBACK | StoreSet.of(best), "similarity-tiebreak")
    return RouteDecision(q.id, FALLBACK, "fallback")


def cost_objective(
    selected: StoreSet, required: StoreSet, acc: AccuracyModel, cost: CostModel, lam: float
) -> float:
    return acc.estimate(selected, required) - lam * access_cost(selected, cost)


def optimal_subset(
    required: StoreSet, acc: AccuracyModel, cost: CostModel, lam: float
) -> tuple[StoreSet, float]:
    """Exhaustive argmax over all 16 subsets.

    Ties go to the cheaper subset, then to the lexicographically smaller
    sorted store tuple.
    """
    if lam < 0:
        raise ConfigError("lambda must be non-negative")
    best: Optional[StoreSet] = None
    best_key = None
    best_value = 0.0
    for subset in StoreSet.all_subsets():
        value = cost_objective(subset, required, acc, cost, lam)
        key = (-value, access_cost(subset, cost), tuple(int(s) for s in subset))
        if best_key is None or key < best_key:
            best, best_key, best_value = subset, key, value
    assert best is not None
    return best, best_value


def route_cost_sensitive(
    q: _HasText,
    label_estimate: StoreSet,
    acc: AccuracyModel,
    cost: CostModel,
    lam: float,
) -> RouteDecision:
    chosen, _ = optimal_subset(label_estimate, acc, cost, lam)
    return RouteDecision(q.id, chosen, f"cost-sensitive(λ={lam:g})")


Router = Callable[[_HasText, Optional[GroundTruthLabel]], RouteDecision]


def make_router(
    spec: PolicySpec,
    lexicon: Lexicon = DEFAULT_LEXICON,
    acc: AccuracyModel | None = None,
    cost: CostModel | None = None,
) -> Router:
    """Bind a policy spec to a ``(query, label) -> RouteDecision`` callable."""
    acc = acc or AccuracyModel()
    cost = cost or CostModel()

    def needs_label(label: Optional[GroundTruthLabel]) -> GroundTruthLabel:
        if label is None:
            raise DatasetError(f"policy {spec.name or spec.kind!r} needs ground-truth labels")
        return label

    if spec.kind == "uniform":
        return lambda q, label=None: route_uniform(q)
    if spec.kind == "oracle":
        return lambda q, label=None: route_oracle(q, needs_label(label))
    if spec.kind == "fixed":
        return lambda q, label=None: route_fixed(q, spec.fixed_stores)
    if spec.kind == "rule_based":
        return lambda q, label=None: route_rule_based(q, lexicon)
    if spec.kind == "hybrid":
        return lambda q, label=None: route_hybrid(
            q, spec.similarity_threshold, lexicon, spec.use_similarity
        )

    def cost_router(q, label=None):
        if spec.label_source == "oracle":
            estimate = needs_label(label).stores
        else:
            estimate = route_hybrid(q, lexicon=lexicon).stores
        return route_cost_sensitive(q, estimate, acc, cost, spec.lam)

    return cost_router
