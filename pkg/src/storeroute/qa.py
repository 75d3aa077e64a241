"""Downstream QA: context assembly, oracle answerers, external chat-completion client."""
from __future__ import annotations

import json
import os
import random
import socket
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .core import STORES, MemoryCorpus, Query, RouteDecision, StoreSet, count_tokens
from .synthgen import AnswerKey

UNKNOWN = "UNKNOWN"

STORE_HEADERS = {
    "stm": "## Short-term memory (current conversation)",
    "summary": "## Summary store (user facts)",
    "ltm": "## Long-term memory (past session summaries)",
    "episodic": "## Episodic memory (raw transcripts)",
}

SYSTEM_PROMPT = (
    "You are a personal assistant with access to the user's memory. "
    "Answer the question using only the memory context provided. "
    "Reply with the answer only. If the context does not contain the answer, reply UNKNOWN."
)
USER_PROMPT = "Memory context:\n{context}\n\nQuestion: {question}\nAnswer:"


@dataclass(frozen=True)
class AssembledContext:
    query_id: str
    stores_used: StoreSet
    text: str
    token_count: int


@dataclass(frozen=True)
class AnswerRecord:
    query_id: str
    produced_answer: str
    correct: bool
    answerer: str
    latency: Optional[float] = None
    error: Optional[str] = None


def score_answer(expected: str, produced: str) -> bool:
    """Case-insensitive substring match of the expected answer."""
    return expected.strip().lower() in produced.lower()


def assemble(decision: RouteDecision, corpus: MemoryCorpus, tokenizer: str = "whitespace") -> AssembledContext:
    blocks = []
    for store in STORES:
        if store not in decision.stores:
            continue
        lines = [STORE_HEADERS[store.key]]
        lines.extend(item.text for item in corpus.store_items(store))
        blocks.append("\n".join(lines))
    text = "\n\n".join(blocks)
    return AssembledContext(decision.query_id, decision.stores, text, count_tokens(text, tokenizer))


def _answer_available(ctx: AssembledContext, key: AnswerKey) -> bool:
    # every answer-bearing passage must be in context: multi-store answers need all their parts
    return bool(key.answer_items) and all(text in ctx.text for _, _, text in key.answer_items)


def answer_oracle(ctx: AssembledContext, key: AnswerKey) -> AnswerRecord:
    if key.query_id != ctx.query_id:
        raise ValueError(f"answer key {key.query_id!r} does not match context {ctx.query_id!r}")
    produced = key.answer if _answer_available(ctx, key) else UNKNOWN
    return AnswerRecord(ctx.query_id, produced, score_answer(key.answer, produced), "oracle")


def answer_noisy_oracle(ctx: AssembledContext, key: AnswerKey, noise: float, seed: int = 0) -> AnswerRecord:
    """Oracle that, with probability ``noise``, answers from a co-retrieved stale passage."""
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1]")
    base = answer_oracle(ctx, key)
    present = [text for _, _, text in key.distractor_items if text in ctx.text]
    if not present or noise == 0.0:
        return AnswerRecord(base.query_id, base.produced_answer, base.correct, "noisy-oracle")
    # string seeds hash deterministically, so the draw is fixed per (seed, query)
    if random.Random(f"{seed}:{ctx.query_id}").random() < noise:
        produced = present[0]
        return AnswerRecord(ctx.query_id, produced, score_answer(key.answer, produced), "noisy-oracle")
    return AnswerRecord(base.query_id, base.produced_answer, base.correct, "noisy-oracle")


# -- external LLM -------------------------------------------------------------


class ExternalLLMError(RuntimeError):
    kind = "external-error"


class EndpointUnreachable(ExternalLLMError):
    kind = "unreachable"


class EndpointTimeout(ExternalLLMError):
    kind = "timeout"


class AuthError(ExternalLLMError):
    kind = "auth"


class BadResponse(ExternalLLMError):
    kind = "bad-response"


@dataclass
class ClientConfig:
    """Chat-completion endpoint settings. Credentials come from the environment."""

    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o-mini"
    api_key_env: str = "OPENAI_API_KEY"
    timeout: float = 30.0
    max_in_flight: int = 4
    audit_log: Optional[str] = None
    _audit_lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @classmethod
    def from_env(cls, **overrides) -> "ClientConfig":
        cfg = cls(**overrides)
        cfg.endpoint = os.environ.get("STOREROUTE_LLM_ENDPOINT", cfg.endpoint)
        cfg.model = os.environ.get("STOREROUTE_LLM_MODEL", cfg.model)
        return cfg

    def api_key(self) -> Optional[str]:
        return os.environ.get(self.api_key_env)


def build_messages(ctx: AssembledContext, question: str) -> list[dict]:
    context = ctx.text if ctx.text else "(no memory retrieved)"
    return [
        {"role": "system", "content": SYSTEM_PROMPT},
        {"role": "user", "content": USER_PROMPT.format(context=context, question=question)},
    ]


def build_request(ctx: AssembledContext, question: str, config: ClientConfig) -> dict:
    return {"model": config.model, "temperature": 0, "messages": build_messages(ctx, question)}


def _audit(config: ClientConfig, record: dict) -> None:
    if not config.audit_log:
        return
    with config._audit_lock, open(config.audit_log, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _post(payload: dict, config: ClientConfig) -> dict:
    headers = {"Content-Type": "application/json"}
    key = config.api_key()
    if key:
        headers["Authorization"] = f"Bearer {key}"
    req = urllib.request.Request(
        config.endpoint, data=json.dumps(payload).encode("utf-8"), headers=headers, method="POST"
    )
    try:
        with urllib.request.urlopen(req, timeout=config.timeout) as resp:
            body = resp.read().decode("utf-8")
    except urllib.error.HTTPError as exc:
        if exc.code in (401, 403):
            raise AuthError(f"HTTP {exc.code} from endpoint") from None
        raise BadResponse(f"HTTP {exc.code} from endpoint") from None
    except (socket.timeout, TimeoutError):
        raise EndpointTimeout(f"no response within {config.timeout}s") from None
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, (socket.timeout, TimeoutError)):
            raise EndpointTimeout(f"no response within {config.timeout}s") from None
        raise EndpointUnreachable(str(exc.reason)) from None
    except OSError as exc:
        raise EndpointUnreachable(str(exc)) from None
    try:
        return json.loads(body)
    except json.JSONDecodeError:
        raise BadResponse("response is not JSON") from None


def answer_external(ctx: AssembledContext, query: Query, config: ClientConfig) -> AnswerRecord:
    payload = build_request(ctx, query.text, config)
    start = time.perf_counter()
    try:
        response = _post(payload, config)
        try:
            produced = response["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise BadResponse("response lacks choices[0].message.content") from None
    except ExternalLLMError as exc:
        latency = time.perf_counter() - start
        _audit(config, {"query_id": query.id, "request": payload, "error": f"{exc.kind}: {exc}"})
        return AnswerRecord(query.id, "", False, "external-llm", latency, f"{exc.kind}: {exc}")
    latency = time.perf_counter() - start
    _audit(config, {"query_id": query.id, "request": payload, "response": response})
    return AnswerRecord(query.id, produced, score_answer(query.answer, produced), "external-llm", latency)


Answerer = Callable[[AssembledContext, Query, AnswerKey], AnswerRecord]

# alternative noise models, e.g. one that degrades with context length
_CUSTOM_ANSWERERS: dict[str, Callable[[float, int], Answerer]] = {}


def register_answerer(kind: str, factory: Callable[[float, int], Answerer]) -> None:
    """Register ``factory(noise, seed) -> Answerer`` under ``kind`` for make_answerer."""
    if kind in ("oracle", "noisy-oracle", "external-llm"):
        raise ValueError(f"{kind!r} is built in")
    _CUSTOM_ANSWERERS[kind] = factory


def make_answerer(
    kind: str, noise: float = 0.0, seed: int = 0, client: Optional[ClientConfig] = None
) -> Answerer:
    if kind == "oracle":
        return lambda ctx, q, key: answer_oracle(ctx, key)
    if kind == "noisy-oracle":
        return lambda ctx, q, key: answer_noisy_oracle(ctx, key, noise, seed)
    if kind == "external-llm":
        cfg = client or ClientConfig.from_env()
        return lambda ctx, q, key: answer_external(ctx, q, cfg)
    if kind in _CUSTOM_ANSWERERS:
        return _CUSTOM_ANSWERERS[kind](noise, seed)
    raise ValueError(f"unknown answerer {kind!r}")


def run_answers(
    decisions: Sequence[RouteDecision],
    queries: Mapping[str, Query],
    corpora: Mapping[str, MemoryCorpus],
    keys: Mapping[str, AnswerKey],
    answerer: Answerer,
    workers: int = 1,
    tokenizer: str = "whitespace",
) -> dict[str, AnswerRecord]:
    """Answer every decision; results are keyed by query id regardless of completion order."""

    def one(d: RouteDecision) -> AnswerRecord:
        ctx = assemble(d, corpora[d.query_id], tokenizer)
        return answerer(ctx, queries[d.query_id], keys[d.query_id])

    if workers <= 1:
        return {d.query_id: one(d) for d in decisions}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(one, decisions))
    return {r.query_id: r for r in records}
