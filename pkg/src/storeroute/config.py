"""INI-style run configuration.

One file, one section per module; every key is optional::

    [synthgen]
    n_queries = 1000
    seed = 42
    regime = short            ; short | long | mixed
    split_ratio = 0.7
    distractor_rate = 0.2
    mix = temporal=1, single_hop=2

    [signals]
    quantity = list all, every, all the, how many
    temporal = before, changed, previous, used to, back when
    multi_hop = compare, relate, both, difference between
    current_session = just said, just mentioned, today, this conversation
    fact_lookup = what is my, who is my, what's my
    past_auxiliaries = did, was, were
    possessives = my, our
    descriptor.summary = profile preference phone email manager ...
    embedder = tf             ; any name passed to register_embedder

    [policies]
    alpha = 0.9
    beta = 0.1
    gamma = 0.02
    threshold = 0.15

    [costs]
    stm = 1
    summary = 1
    ltm = 3
    episodic = 5
    tokenizer = whitespace

    [qa]
    answerer = oracle         ; oracle | noisy-oracle | external-llm
    noise = 0.0
    endpoint = https://api.openai.com/v1/chat/completions
    model = gpt-4o-mini
    max_in_flight = 4
    audit_log = audit.jsonl

    [eval]
    policies = oracle, uniform, hybrid, rules
    baseline = uniform
    split = test
    bootstrap_iterations = 1000
"""
from __future__ import annotations

import configparser
from pathlib import Path
from typing import Optional

from .core import STORES, ConfigError, CostModel, StoreId
from .policies import AccuracyModel
from .signals import DEFAULT_LEXICON, Lexicon, StoreDescriptor

_CUE_KEYS = (
    "quantity",
    "temporal",
    "multi_hop",
    "current_session",
    "fact_lookup",
    "past_auxiliaries",
    "possessives",
)


def read_config(path: Optional[str | Path]) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is None:
        return parser
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        parser.read(p, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from None
    return parser


def get(parser: configparser.ConfigParser, section: str, key: str, fallback=None):
    if parser.has_option(section, key):
        return parser.get(section, key)
    return fallback


def split_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def parse_mix(text: str) -> dict[str, float]:
    mix = {}
    for part in split_list(text):
        name, sep, weight = part.partition("=")
        if not sep:
            raise ConfigError(f"mix entries look like type=weight, got {part!r}")
        try:
            mix[name.strip()] = float(weight)
        except ValueError:
            raise ConfigError(f"bad mix weight in {part!r}") from None
    return mix


def lexicon_from(parser: configparser.ConfigParser) -> Lexicon:
    if not parser.has_section("signals"):
        return DEFAULT_LEXICON
    changes = {}
    for key in _CUE_KEYS:
        value = get(parser, "signals", key)
        if value is not None:
            changes[key] = tuple(p.lower() for p in split_list(value))
    descriptors = {d.store: d.descriptor_text for d in DEFAULT_LEXICON.descriptors}
    for store in STORES:
        value = get(parser, "signals", f"descriptor.{store.key}")
        if value is not None:
            descriptors[store] = value
    changes["descriptors"] = tuple(StoreDescriptor(s, descriptors[s]) for s in STORES)
    embedder = get(parser, "signals", "embedder")
    if embedder is not None:
        changes["embedder"] = embedder
    return DEFAULT_LEXICON.with_updates(**changes)


def cost_model_from(parser: configparser.ConfigParser) -> CostModel:
    base = CostModel()
    costs = dict(base.per_store_access_cost)
    for store in STORES:
        value = get(parser, "costs", store.key)
        if value is not None:
            try:
                costs[store] = float(value)
            except ValueError:
                raise ConfigError(f"bad cost for {store.key}: {value!r}") from None
    return CostModel(costs, get(parser, "costs", "tokenizer", base.tokenizer))


def accuracy_model_from(parser: configparser.ConfigParser, **overrides) -> AccuracyModel:
    values = {}
    for key in ("alpha", "beta", "gamma"):
        raw = overrides.get(key)
        if raw is None:
            raw = get(parser, "policies", key)
        if raw is not None:
            try:
                values[key] = float(raw)
            except ValueError:
                raise ConfigError(f"bad {key}: {raw!r}") from None
    return AccuracyModel(**values)


def store_costs_text(model: CostModel) -> dict[str, float]:
    return {s.key: model.per_store_access_cost[StoreId(s)] for s in STORES}
