"""Memory-store routing: policies, metrics, synthetic data and a QA harness."""
from .core import (
    ConfigError,
    CostModel,
    DatasetError,
    GroundTruthLabel,
    MemoryCorpus,
    MemoryItem,
    Query,
    QueryType,
    RouteDecision,
    StoreId,
    StoreSet,
    access_cost,
    count_tokens,
    label_for_type,
    register_tokenizer,
)
from .metrics import bootstrap_diff, context_tokens, coverage, exact_match, routing_metrics, waste
from .policies import (
    BENCH_POLICIES,
    AccuracyModel,
    PolicySpec,
    make_router,
    parse_policy,
    route_cost_sensitive,
    route_fixed,
    route_hybrid,
    route_oracle,
    route_rule_based,
    route_uniform,
)
from .signals import Lexicon, extract_signals, register_embedder, similarity
from .synthgen import GeneratorConfig, generate_dataset, generate_qa_pack, load_dataset, write_dataset

__version__ = "0.1.0"
