"""Seeded synthetic dataset generator and the on-disk dataset format.

A dataset is a set of queries, one memory snapshot per query (four stores
padded with filler to the regime's token target), and a train/test split.
On disk::

    queries.jsonl   {id, text, query_type, answer, regime, ground_truth_stores}
    memory.jsonl    {store, text, planted_answer_for, is_distractor_for, owner}
    splits.json     {"train": [...ids], "test": [...ids]}
    manifest.json   generator config, seed, sha256 of the three files above
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    REGIME_TOKENS,
    STORES,
    ConfigError,
    DatasetError,
    GroundTruthLabel,
    MemoryCorpus,
    MemoryItem,
    Query,
    QueryType,
    StoreId,
    StoreSet,
    count_tokens,
    label_for_type,
)
from .templates import DISTRACTOR_TYPES, SCENARIOS, TEMPLATES, filler_sentence

REGIME_CHOICES = ("short", "long", "mixed")
# share of long-regime queries under "mixed" (100 short / 50 long in the LLM study)
MIXED_LONG_SHARE = 1 / 3
TOKEN_TOLERANCE = 0.25

DATA_FILES = ("queries.jsonl", "memory.jsonl", "splits.json")


@dataclass(frozen=True)
class GeneratorConfig:
    n_queries: int = 1000
    type_mix: Optional[Mapping[str, float]] = None
    split_ratio: float = 0.7
    seed: int = 42
    regime: str = "short"
    distractor_rate: float = 0.2

    def __post_init__(self) -> None:
        if self.n_queries < 1:
            raise ConfigError("n_queries must be at least 1")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError("split_ratio must lie strictly between 0 and 1")
        if self.regime not in REGIME_CHOICES:
            raise ConfigError(f"regime must be one of {REGIME_CHOICES}")
        if not 0.0 <= self.distractor_rate <= 1.0:
            raise ConfigError("distractor_rate must lie in [0, 1]")
        mix = self.mix()
        if any(w < 0 for w in mix.values()) or not any(w > 0 for w in mix.values()):
            raise ConfigError("type mix weights must be non-negative with at least one positive")

    def mix(self) -> dict[QueryType, float]:
        if self.type_mix is None:
            return {t: 1.0 for t in QueryType}
        try:
            parsed = {QueryType(k): float(v) for k, v in self.type_mix.items()}
        except ValueError as exc:
            raise ConfigError(f"bad type mix: {exc}") from None
        return {t: parsed.get(t, 0.0) for t in QueryType}

    def as_dict(self) -> dict:
        d = asdict(self)
        d["type_mix"] = {t.value: w for t, w in self.mix().items()}
        return d


@dataclass(frozen=True)
class FactSlot:
    slot_name: str
    current_value: str
    historical_value: Optional[str] = None

    def __post_init__(self) -> None:
        if self.historical_value is not None and self.historical_value == self.current_value:
            raise DatasetError(f"fact slot {self.slot_name!r}: historical equals current value")


@dataclass
class Dataset:
    queries: list[Query]
    labels: dict[str, GroundTruthLabel]
    corpora: dict[str, MemoryCorpus]
    splits: dict[str, list[str]] = field(default_factory=dict)
    facts: dict[str, FactSlot] = field(default_factory=dict)
    config: Optional[dict] = None

    def select(self, split: str = "all") -> "Dataset":
        if split == "all":
            return self
        if split not in self.splits:
            raise ConfigError(f"unknown split {split!r}")
        keep = set(self.splits[split])
        return Dataset(
            queries=[q for q in self.queries if q.id in keep],
            labels={k: v for k, v in self.labels.items() if k in keep},
            corpora={k: v for k, v in self.corpora.items() if k in keep},
            splits={split: list(self.splits[split])},
            facts={k: v for k, v in self.facts.items() if k in keep},
            config=self.config,
        )

    def label_list(self) -> list[GroundTruthLabel]:
        return [self.labels[q.id] for q in self.queries]


def type_counts(n: int, mix: Mapping[QueryType, float]) -> dict[QueryType, int]:
    """Largest-remainder apportionment, so every count is within 1 of n * share."""
    total = sum(mix.values())
    exact = {t: n * w / total for t, w in mix.items()}
    counts = {t: int(v) for t, v in exact.items()}
    short = n - sum(counts.values())
    by_remainder = sorted(mix, key=lambda t: (-(exact[t] - counts[t]), list(QueryType).index(t)))
    for t in by_remainder[:short]:
        counts[t] += 1
    return counts


def _fill_store(
    store: StoreId,
    planted: list[MemoryItem],
    owner: str,
    target: int,
    rng: random.Random,
) -> tuple[MemoryItem, ...]:
    items = list(planted)
    total = sum(count_tokens(it.text) for it in items)
    last = None
    while total < 0.95 * target:
        text = filler_sentence(store, rng)
        if text == last:
            continue
        last = text
        items.append(MemoryItem(store, text, owner=owner))
        total += count_tokens(text)
    rng.shuffle(items)
    return tuple(items)


def generate_dataset(config: GeneratorConfig) -> Dataset:
    rng = random.Random(config.seed)
    counts = type_counts(config.n_queries, config.mix())
    order = [t for t in QueryType for _ in range(counts[t])]
    rng.shuffle(order)
    width = max(4, len(str(config.n_queries)))

    queries: list[Query] = []
    labels: dict[str, GroundTruthLabel] = {}
    corpora: dict[str, MemoryCorpus] = {}
    facts: dict[str, FactSlot] = {}
    for i, qtype in enumerate(order, start=1):
        qid = f"q{i:0{width}d}"
        if config.regime == "mixed":
            regime = "long" if rng.random() < MIXED_LONG_SHARE else "short"
        else:
            regime = config.regime
        distract = qtype in DISTRACTOR_TYPES and rng.random() < config.distractor_rate
        scenario = SCENARIOS[qtype](rng, distract)
        template = rng.choice(TEMPLATES[qtype])
        text = template.text.format(**scenario.slots)
        query = Query(qid, text, qtype, scenario.answer, regime)
        label = GroundTruthLabel(qid, label_for_type(qtype))

        planted: dict[StoreId, list[MemoryItem]] = {s: [] for s in STORES}
        for store, passage in scenario.answers:
            planted[store].append(MemoryItem(store, passage, planted_answer_for=qid, owner=qid))
        for store, passage in scenario.distractors:
            planted[store].append(MemoryItem(store, passage, is_distractor_for=qid, owner=qid))
        target = REGIME_TOKENS[regime]
        corpus = MemoryCorpus(
            {s: _fill_store(s, planted[s], qid, target, rng) for s in STORES}, regime
        )
        if scenario.slot_name and scenario.historical_value is not None:
            facts[qid] = FactSlot(scenario.slot_name, scenario.answer, scenario.historical_value)

        queries.append(query)
        labels[qid] = label
        corpora[qid] = corpus

    ids = [q.id for q in queries]
    shuffled = ids[:]
    rng.shuffle(shuffled)
    n_train = round(len(ids) * config.split_ratio)
    train = set(shuffled[:n_train])
    splits = {
        "train": [i for i in ids if i in train],
        "test": [i for i in ids if i not in train],
    }
    return Dataset(queries, labels, corpora, splits, facts, config.as_dict())


# -- answer keys --------------------------------------------------------------


@dataclass(frozen=True)
class AnswerKey:
    query_id: str
    answer: str
    answer_items: tuple[tuple[str, StoreId, str], ...]
    distractor_items: tuple[tuple[str, StoreId, str], ...]

    @property
    def answer_stores(self) -> StoreSet:
        return StoreSet(store for _, store, _ in self.answer_items)


def generate_qa_pack(
    queries: Sequence[Query],
    corpora: Mapping[str, MemoryCorpus],
    labels: Optional[Mapping[str, GroundTruthLabel]] = None,
) -> dict[str, AnswerKey]:
    """Link each query to the item ids that carry its answer and any distractors."""
    known = {q.id for q in queries}
    pack: dict[str, AnswerKey] = {}
    for q in queries:
        corpus = corpora.get(q.id)
        if corpus is None:
            raise DatasetError(f"query {q.id}: no memory snapshot")
        answers, distractors = [], []
        for item_id, item in corpus.iter_items():
            for ref in (item.planted_answer_for, item.is_distractor_for):
                if ref is not None and ref not in known:
                    raise DatasetError(f"item {item_id} references unknown query {ref!r}")
            if item.planted_answer_for == q.id:
                answers.append((item_id, item.store, item.text))
            if item.is_distractor_for == q.id:
                distractors.append((item_id, item.store, item.text))
        required = labels[q.id].stores if labels is not None else label_for_type(q.query_type)
        if not required:
            raise DatasetError(f"query {q.id}: empty ground-truth set")
        key = AnswerKey(q.id, q.answer, tuple(answers), tuple(distractors))
        if not required <= key.answer_stores:
            missing = (required - key.answer_stores).names()
            raise DatasetError(f"query {q.id}: no answer planted in {missing}")
        pack[q.id] = key
    return pack


# -- serialization ------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False)


def query_record(q: Query, label: GroundTruthLabel) -> dict:
    return {
        "id": q.id,
        "text": q.text,
        "query_type": q.query_type.value,
        "answer": q.answer,
        "regime": q.regime,
        "ground_truth_stores": label.stores.names(),
    }


def item_record(item: MemoryItem) -> dict:
    return {
        "store": item.store.key,
        "text": item.text,
        "planted_answer_for": item.planted_answer_for,
        "is_distractor_for": item.is_distractor_for,
        "owner": item.owner,
    }


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_dataset(ds: Dataset, out_dir: str | Path) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "queries.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for q in ds.queries:
            fh.write(_dumps(query_record(q, ds.labels[q.id])) + "\n")
    with open(out / "memory.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for q in ds.queries:
            corpus = ds.corpora[q.id]
            for store in STORES:
                for item in corpus.store_items(store):
                    fh.write(_dumps(item_record(item)) + "\n")
    (out / "splits.json").write_text(_dumps(ds.splits) + "\n", encoding="utf-8")
    manifest = {
        "kind": "dataset",
        "config": ds.config,
        "seed": (ds.config or {}).get("seed"),
        "counts": {
            "queries": len(ds.queries),
            "train": len(ds.splits.get("train", [])),
            "test": len(ds.splits.get("test", [])),
            "by_type": {t.value: sum(q.query_type is t for q in ds.queries) for t in QueryType},
        },
        "files": {name: sha256_file(out / name) for name in DATA_FILES},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def _read_jsonl(path: Path) -> Iterable[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DatasetError(f"{path}:{lineno}: {exc}") from None


def load_dataset(path: str | Path, verify: bool = True) -> Dataset:
    root = Path(path)
    for name in ("queries.jsonl", "memory.jsonl"):
        if not (root / name).exists():
            raise DatasetError(f"missing {root / name}")
    manifest_path = root / "manifest.json"
    config = None
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        config = manifest.get("config")
        if verify:
            for name, digest in manifest.get("files", {}).items():
                if (root / name).exists() and sha256_file(root / name) != digest:
                    raise DatasetError(f"hash mismatch for {name}: file changed since generation")

    queries: list[Query] = []
    labels: dict[str, GroundTruthLabel] = {}
    for rec in _read_jsonl(root / "queries.jsonl"):
        try:
            q = Query(rec["id"], rec["text"], QueryType(rec["query_type"]), rec["answer"], rec["regime"])
            stores = StoreSet.from_names(rec["ground_truth_stores"])
        except (KeyError, ValueError) as exc:
            raise DatasetError(f"bad query record {rec.get('id')!r}: {exc}") from None
        if q.id in labels:
            raise DatasetError(f"duplicate query id {q.id}")
        queries.append(q)
        labels[q.id] = GroundTruthLabel(q.id, stores)

    grouped: dict[str, dict[StoreId, list[MemoryItem]]] = {q.id: {s: [] for s in STORES} for q in queries}
    for rec in _read_jsonl(root / "memory.jsonl"):
        owner = rec.get("owner") or rec.get("planted_answer_for") or rec.get("is_distractor_for")
        if owner not in grouped:
            raise DatasetError(f"memory item owned by unknown query {owner!r}")
        item = MemoryItem(
            StoreId.parse(rec["store"]),
            rec["text"],
            rec.get("planted_answer_for"),
            rec.get("is_distractor_for"),
            owner,
        )
        grouped[owner][item.store].append(item)
    regimes = {q.id: q.regime for q in queries}
    corpora = {
        qid: MemoryCorpus({s: tuple(v) for s, v in by_store.items()}, regimes[qid])
        for qid, by_store in grouped.items()
    }
    splits: dict[str, list[str]] = {}
    if (root / "splits.json").exists():
        splits = json.loads((root / "splits.json").read_text(encoding="utf-8"))
    return Dataset(queries, labels, corpora, splits, {}, config)
