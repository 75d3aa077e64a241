"""Store universe, queries, labels, memory content and the cost model."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional


class ConfigError(ValueError):
    """Invalid configuration: unknown tags, malformed policy strings, bad parameters."""


class DatasetError(ValueError):
    """Inconsistent dataset: mismatched ids, dangling references, hash mismatches."""


class StoreId(enum.IntEnum):
    STM = 0
    SUMMARY = 1
    LTM = 2
    EPISODIC = 3

    @property
    def key(self) -> str:
        return _STORE_KEYS[self]

    @classmethod
    def parse(cls, name: str) -> "StoreId":
        try:
            return _STORE_ALIASES[name.strip().lower()]
        except KeyError:
            raise ConfigError(f"unknown store name: {name!r}") from None


_STORE_KEYS = {
    StoreId.STM: "stm",
    StoreId.SUMMARY: "summary",
    StoreId.LTM: "ltm",
    StoreId.EPISODIC: "episodic",
}
_STORE_ALIASES = {
    "stm": StoreId.STM,
    "short_term": StoreId.STM,
    "shortterm": StoreId.STM,
    "sum": StoreId.SUMMARY,
    "summary": StoreId.SUMMARY,
    "ltm": StoreId.LTM,
    "long_term": StoreId.LTM,
    "longterm": StoreId.LTM,
    "epi": StoreId.EPISODIC,
    "episodic": StoreId.EPISODIC,
}

STORES: tuple[StoreId, ...] = tuple(StoreId)


class StoreSet:
    """Immutable subset of the four stores, held as a 4-bit mask.

    Iteration always follows the fixed ``StoreId`` order.
    """

    __slots__ = ("_mask",)

    def __init__(self, stores: Iterable[StoreId] = ()) -> None:
        mask = 0
        for s in stores:
            mask |= 1 << int(s)
        self._mask = mask

    @classmethod
    def from_mask(cls, mask: int) -> "StoreSet":
        if not 0 <= mask <= 15:
            raise ValueError(f"store mask out of range: {mask}")
        obj = cls.__new__(cls)
        obj._mask = mask
        return obj

    @classmethod
    def of(cls, *stores: StoreId) -> "StoreSet":
        return cls(stores)

    @classmethod
    def full(cls) -> "StoreSet":
        return cls.from_mask(15)

    @classmethod
    def empty(cls) -> "StoreSet":
        return cls.from_mask(0)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "StoreSet":
        return cls(StoreId.parse(n) for n in names)

    @classmethod
    def parse(cls, text: str) -> "StoreSet":
        """Parse a '+'-joined store list such as ``stm+sum+ltm``."""
        text = text.strip()
        if not text:
            raise ConfigError("empty store list")
        return cls.from_names(text.split("+"))

    @staticmethod
    def all_subsets() -> list["StoreSet"]:
        return [StoreSet.from_mask(m) for m in range(16)]

    @property
    def mask(self) -> int:
        return self._mask

    def names(self) -> list[str]:
        return [s.key for s in self]

    def __iter__(self) -> Iterator[StoreId]:
        for s in STORES:
            if self._mask >> int(s) & 1:
                yield s

    def __len__(self) -> int:
        return bin(self._mask).count("1")

    def __contains__(self, store: object) -> bool:
        return isinstance(store, StoreId) and bool(self._mask >> int(store) & 1)

    def __bool__(self) -> bool:
        return self._mask != 0

    def __or__(self, other: "StoreSet") -> "StoreSet":
        return StoreSet.from_mask(self._mask | other._mask)

    def __and__(self, other: "StoreSet") -> "StoreSet":
        return StoreSet.from_mask(self._mask & other._mask)

    def __sub__(self, other: "StoreSet") -> "StoreSet":
        return StoreSet.from_mask(self._mask & ~other._mask)

    def __le__(self, other: "StoreSet") -> bool:
        return self._mask & ~other._mask == 0

    def __ge__(self, other: "StoreSet") -> bool:
        return other <= self

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StoreSet) and self._mask == other._mask

    def __hash__(self) -> int:
        return hash(("StoreSet", self._mask))

    def __repr__(self) -> str:
        return "StoreSet({" + ", ".join(self.names()) + "})"

    def __str__(self) -> str:
        return "+".join(self.names()) or "none"


class QueryType(str, enum.Enum):
    SINGLE_HOP = "single_hop"
    SINGLE_SESSION = "single_session"
    RECENT_SESSION = "recent_session"
    MULTI_HOP = "multi_hop"
    MEMORY_CAPACITY = "memory_capacity"
    TEMPORAL = "temporal"
    KNOWLEDGE_UPDATE = "knowledge_update"


_S = StoreId
TYPE_TO_STORES: Mapping[QueryType, StoreSet] = {
    QueryType.SINGLE_HOP: StoreSet.of(_S.SUMMARY),
    QueryType.SINGLE_SESSION: StoreSet.of(_S.STM),
    QueryType.RECENT_SESSION: StoreSet.of(_S.LTM),
    QueryType.MULTI_HOP: StoreSet.of(_S.SUMMARY, _S.LTM),
    QueryType.MEMORY_CAPACITY: StoreSet.of(_S.LTM, _S.EPISODIC),
    QueryType.TEMPORAL: StoreSet.of(_S.LTM, _S.EPISODIC),
    QueryType.KNOWLEDGE_UPDATE: StoreSet.of(_S.SUMMARY, _S.LTM),
}


def label_for_type(t: QueryType) -> StoreSet:
    return TYPE_TO_STORES[QueryType(t)]


REGIMES = ("short", "long")
REGIME_TOKENS = {"short": 200, "long": 1000}


@dataclass(frozen=True)
class Query:
    id: str
    text: str
    query_type: QueryType
    answer: str
    regime: str = "short"

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise DatasetError(f"query {self.id}: empty text")
        if not self.answer.strip():
            raise DatasetError(f"query {self.id}: empty answer")
        if self.regime not in REGIMES:
            raise DatasetError(f"query {self.id}: unknown regime {self.regime!r}")


@dataclass(frozen=True)
class GroundTruthLabel:
    query_id: str
    stores: StoreSet

    def __post_init__(self) -> None:
        if not self.stores:
            raise DatasetError(f"query {self.query_id}: empty ground-truth store set")


@dataclass(frozen=True)
class RouteDecision:
    query_id: str
    stores: StoreSet
    provenance: str


@dataclass(frozen=True)
class MemoryItem:
    store: StoreId
    text: str
    planted_answer_for: Optional[str] = None
    is_distractor_for: Optional[str] = None
    # id of the query whose memory snapshot holds this item
    owner: Optional[str] = None

    def __post_init__(self) -> None:
        if (
            self.planted_answer_for is not None
            and self.planted_answer_for == self.is_distractor_for
        ):
            raise DatasetError("an item cannot be both answer and distractor for one query")


@dataclass(frozen=True)
class MemoryCorpus:
    """Memory snapshot for one query: items grouped by store, in corpus order."""

    items: Mapping[StoreId, tuple[MemoryItem, ...]]
    regime: str = "short"

    def store_items(self, store: StoreId) -> tuple[MemoryItem, ...]:
        return self.items.get(store, ())

    def item_id(self, store: StoreId, index: int) -> str:
        owner = self.items[store][index].owner or "corpus"
        return f"{owner}/{store.key}/{index}"

    def iter_items(self) -> Iterator[tuple[str, MemoryItem]]:
        for store in STORES:
            for i, item in enumerate(self.store_items(store)):
                yield self.item_id(store, i), item


# -- tokenizers ---------------------------------------------------------------

Tokenizer = Callable[[str], int]

_TOKENIZERS: dict[str, Tokenizer] = {"whitespace": lambda text: len(text.split())}


def register_tokenizer(tag: str, fn: Tokenizer) -> None:
    """Register a token-count function under ``tag`` (e.g. a tiktoken wrapper)."""
    _TOKENIZERS[tag] = fn


def count_tokens(text: str, tokenizer: str = "whitespace") -> int:
    try:
        fn = _TOKENIZERS[tokenizer]
    except KeyError:
        raise ConfigError(f"unknown tokenizer tag: {tokenizer!r}") from None
    return fn(text)


# -- access costs -------------------------------------------------------------

DEFAULT_ACCESS_COSTS: Mapping[StoreId, float] = {
    StoreId.STM: 1.0,
    StoreId.SUMMARY: 1.0,
    StoreId.LTM: 3.0,
    StoreId.EPISODIC: 5.0,
}


@dataclass(frozen=True)
class CostModel:
    per_store_access_cost: Mapping[StoreId, float] = field(
        default_factory=lambda: dict(DEFAULT_ACCESS_COSTS)
    )
    tokenizer: str = "whitespace"

    def __post_init__(self) -> None:
        missing = [s.key for s in STORES if s not in self.per_store_access_cost]
        if missing:
            raise ConfigError(f"cost model missing stores: {missing}")
        if any(c < 0 for c in self.per_store_access_cost.values()):
            raise ConfigError("store access costs must be non-negative")


def access_cost(stores: StoreSet, model: CostModel | None = None) -> float:
    model = model or CostModel()
    return sum((model.per_store_access_cost[s] for s in stores), 0.0)
