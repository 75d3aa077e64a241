"""Cue-phrase signals and bag-of-words query/store similarity."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Mapping, Sequence, Union

from .core import STORES, ConfigError, StoreId

QUANTITY_CUES = ("list all", "every", "all the", "how many")
TEMPORAL_CUES = ("before", "changed", "previous", "used to", "back when")
MULTI_HOP_CUES = ("compare", "relate", "both", "difference between")
CURRENT_SESSION_CUES = ("just said", "just mentioned", "today", "this conversation")
FACT_LOOKUP_CUES = ("what is my", "who is my", "what's my")
PAST_AUXILIARIES = ("did", "was", "were")
POSSESSIVES = ("my", "our")

DEFAULT_DESCRIPTORS: Mapping[StoreId, str] = {
    StoreId.STM: (
        "current conversation chat recent turns latest message moment ago "
        "right now this session meeting schedule clarification request"
    ),
    StoreId.SUMMARY: (
        "profile preference phone number email contact manager name biography "
        "fact employer job address birthday allergy favorite details"
    ),
    StoreId.LTM: (
        "past conversation sessions session summary earlier discussion last week "
        "last month history previous talked discussed topics"
    ),
    StoreId.EPISODIC: (
        "raw transcript exact words wording verbatim quote precise timestamp "
        "turn utterance phrase said"
    ),
}

_WORD = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class StoreDescriptor:
    store: StoreId
    descriptor_text: str

    def __post_init__(self) -> None:
        if not self.descriptor_text.strip():
            raise ConfigError(f"empty descriptor for store {self.store.key}")


@dataclass(frozen=True)
class Lexicon:
    """Cue phrase lists and store descriptors used by the routers.

    Swappable as a whole so ablations can run against edited lists.
    """

    quantity: tuple[str, ...] = QUANTITY_CUES
    temporal: tuple[str, ...] = TEMPORAL_CUES
    multi_hop: tuple[str, ...] = MULTI_HOP_CUES
    current_session: tuple[str, ...] = CURRENT_SESSION_CUES
    fact_lookup: tuple[str, ...] = FACT_LOOKUP_CUES
    past_auxiliaries: tuple[str, ...] = PAST_AUXILIARIES
    possessives: tuple[str, ...] = POSSESSIVES
    descriptors: tuple[StoreDescriptor, ...] = field(
        default_factory=lambda: tuple(
            StoreDescriptor(s, DEFAULT_DESCRIPTORS[s]) for s in STORES
        )
    )
    embedder: str = "tf"

    def __post_init__(self) -> None:
        stores = sorted(d.store for d in self.descriptors)
        if stores != list(STORES):
            raise ConfigError("lexicon needs exactly one descriptor per store")
        if self.embedder not in _EMBEDDERS:
            raise ConfigError(f"unknown embedder {self.embedder!r}")

    def with_updates(self, **changes) -> "Lexicon":
        return replace(self, **changes)


Vector = Union[Mapping[str, float], Sequence[float]]
_EMBEDDERS: dict[str, Callable[[str], Vector]] = {}


def register_embedder(name: str, fn: Callable[[str], Vector]) -> None:
    """Make ``fn`` (text -> sparse mapping or dense sequence) usable as ``Lexicon.embedder``."""
    _EMBEDDERS[name] = fn


def term_vector(text: str) -> Counter[str]:
    return Counter(_WORD.findall(text.lower()))


register_embedder("tf", term_vector)

DEFAULT_LEXICON = Lexicon()


@dataclass(frozen=True)
class SignalProfile:
    quantity: bool = False
    temporal: bool = False
    multi_hop: bool = False
    current_session: bool = False
    fact_lookup: bool = False
    past_tense: bool = False
    possessive_pronoun: bool = False


@lru_cache(maxsize=None)
def _phrase_pattern(phrases: tuple[str, ...]) -> re.Pattern[str]:
    alts = "|".join(r"\s+".join(map(re.escape, p.lower().split())) for p in phrases)
    return re.compile(rf"(?<!\w)(?:{alts})(?!\w)")


def _has_phrase(lowered: str, phrases: tuple[str, ...]) -> bool:
    if not phrases:
        return False
    return _phrase_pattern(phrases).search(lowered) is not None


def _normalise(text: str) -> str:
    # curly apostrophes would otherwise split "what's"
    return text.lower().replace("’", "'")


def _is_past_tense(lowered: str, auxiliaries: tuple[str, ...]) -> bool:
    for token in re.findall(r"[a-z']+", lowered):
        # four letters minimum keeps "red"/"bed" out; "need" still slips through
        if len(token) >= 4 and token.endswith("ed"):
            return True
        if token in auxiliaries:
            return True
    return False


def extract_signals(text: str, lexicon: Lexicon = DEFAULT_LEXICON) -> SignalProfile:
    lowered = _normalise(text)
    return SignalProfile(
        quantity=_has_phrase(lowered, lexicon.quantity),
        temporal=_has_phrase(lowered, lexicon.temporal),
        multi_hop=_has_phrase(lowered, lexicon.multi_hop),
        current_session=_has_phrase(lowered, lexicon.current_session),
        fact_lookup=_has_phrase(lowered, lexicon.fact_lookup),
        past_tense=_is_past_tense(lowered, lexicon.past_auxiliaries),
        possessive_pronoun=_has_phrase(lowered, lexicon.possessives),
    )


def _as_mapping(v: Vector) -> Mapping:
    return v if isinstance(v, Mapping) else dict(enumerate(v))


def cosine(a: Vector, b: Vector) -> float:
    a, b = _as_mapping(a), _as_mapping(b)
    if not a or not b:
        return 0.0
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(v * v for v in a.values())) * math.sqrt(
        sum(v * v for v in b.values())
    )
    return min(1.0, dot / norm)


@lru_cache(maxsize=32)
def _descriptor_vectors(
    descriptors: tuple[StoreDescriptor, ...], embedder: str
) -> tuple[tuple[StoreId, Vector], ...]:
    embed = _EMBEDDERS[embedder]
    return tuple((d.store, embed(d.descriptor_text)) for d in descriptors)


def similarity(
    text: str,
    descriptors: tuple[StoreDescriptor, ...] = DEFAULT_LEXICON.descriptors,
    embedder: str = "tf",
) -> dict[StoreId, float]:
    """Cosine between the query embedding (term frequencies by default) and each store descriptor."""
    if embedder not in _EMBEDDERS:
        raise ConfigError(f"unknown embedder {embedder!r}")
    q = _EMBEDDERS[embedder](text)
    scores = {store: cosine(q, vec) for store, vec in _descriptor_vectors(tuple(descriptors), embedder)}
    missing = [s for s in STORES if s not in scores]
    if missing:
        raise ConfigError(f"missing descriptors for {[s.key for s in missing]}")
    return {s: scores[s] for s in STORES}
