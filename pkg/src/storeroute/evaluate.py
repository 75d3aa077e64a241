"""Evaluation harness: per-policy metrics, breakdowns, lambda sweeps, feature ablation."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import CostModel, QueryType, RouteDecision, access_cost
from .metrics import CSV_COLUMNS, BootstrapResult, bootstrap_diff, routing_metrics
from .policies import AccuracyModel, PolicySpec, make_router, optimal_subset, parse_policy
from .qa import AnswerRecord, Answerer, answer_oracle, assemble, make_answerer, run_answers
from .signals import DEFAULT_LEXICON, Lexicon
from .synthgen import Dataset, generate_qa_pack


@dataclass
class PolicyResult:
    policy: str
    decisions: list[RouteDecision]
    metrics: dict
    qa_accuracy: float
    answers: dict[str, AnswerRecord]
    route_ms: float
    by_type: dict[str, dict] = field(default_factory=dict)
    by_regime: dict[str, dict] = field(default_factory=dict)

    def row(self) -> dict:
        return {**{"policy": self.policy}, **self.metrics, "qa_accuracy": self.qa_accuracy}


@dataclass
class EvalReport:
    results: list[PolicyResult]
    baseline: Optional[str] = None
    comparisons: dict[str, BootstrapResult] = field(default_factory=dict)
    analytic: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def result(self, policy: str) -> PolicyResult:
        for r in self.results:
            if r.policy == policy:
                return r
        raise KeyError(policy)

    def to_json(self) -> dict:
        return {
            "meta": self.meta,
            "analytic": self.analytic,
            "policies": [
                {
                    **r.row(),
                    "route_ms_per_query": r.route_ms,
                    "by_type": r.by_type,
                    "by_regime": r.by_regime,
                }
                for r in self.results
            ],
            "bootstrap": {
                "baseline": self.baseline,
                "comparisons": {k: v.as_dict() for k, v in self.comparisons.items()},
            },
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in self.results:
            row = r.row()
            writer.writerow({k: _fmt(row[k]) for k in CSV_COLUMNS})
        return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _summarise(ds: Dataset, decisions: Sequence[RouteDecision], answers, cost: CostModel) -> dict:
    labels = [ds.labels[d.query_id] for d in decisions]
    m = routing_metrics(labels, decisions, ds.corpora, cost).as_dict()
    m["qa_accuracy"] = sum(answers[d.query_id].correct for d in decisions) / len(decisions)
    return m


def evaluate_policies(
    ds: Dataset,
    policies: Sequence[str],
    answerer: Answerer | None = None,
    lexicon: Lexicon = DEFAULT_LEXICON,
    acc: AccuracyModel | None = None,
    cost: CostModel | None = None,
    baseline: Optional[str] = None,
    bootstrap_iterations: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> EvalReport:
    if not ds.queries:
        raise ValueError("dataset has no queries")
    cost = cost or CostModel()
    answerer = answerer or make_answerer("oracle")
    specs: list[PolicySpec] = [parse_policy(p) for p in policies]
    keys = generate_qa_pack(ds.queries, ds.corpora, ds.labels)
    by_id = {q.id: q for q in ds.queries}

    results = []
    for spec in specs:
        router = make_router(spec, lexicon, acc, cost)
        t0 = time.perf_counter()
        decisions = [router(q, ds.labels[q.id]) for q in ds.queries]
        route_ms = (time.perf_counter() - t0) * 1000.0 / len(ds.queries)
        answers = run_answers(decisions, by_id, ds.corpora, keys, answerer, workers, cost.tokenizer)
        overall = _summarise(ds, decisions, answers, cost)
        qa = overall.pop("qa_accuracy")
        by_type = {}
        for t in QueryType:
            sub = [d for d in decisions if by_id[d.query_id].query_type is t]
            if sub:
                by_type[t.value] = _summarise(ds, sub, answers, cost)
        by_regime = {}
        for regime in ("short", "long"):
            sub = [d for d in decisions if by_id[d.query_id].regime == regime]
            if sub:
                by_regime[regime] = _summarise(ds, sub, answers, cost)
        results.append(
            PolicyResult(spec.name, decisions, overall, qa, answers, route_ms, by_type, by_regime)
        )

    report = EvalReport(results)
    if baseline is not None:
        base = report.result(baseline)
        order = [q.id for q in ds.queries]
        for r in results:
            if r.policy == baseline:
                continue
            report.comparisons[r.policy] = bootstrap_diff(
                [int(r.answers[i].correct) for i in order],
                [int(base.answers[i].correct) for i in order],
                bootstrap_iterations,
                seed,
            )
        report.baseline = baseline
    sizes = [len(ds.labels[q.id].stores) for q in ds.queries]
    report.analytic = {
        "mean_label_size": sum(sizes) / len(sizes),
        "uniform_waste": (4 * len(sizes) - sum(sizes)) / len(sizes),
        "oracle_access_cost": sum(access_cost(ds.labels[q.id].stores, cost) for q in ds.queries)
        / len(ds.queries),
    }
    return report


# -- lambda sweep -------------------------------------------------------------

SWEEP_COLUMNS = (
    "lambda",
    "mean_access_cost",
    "mean_stores",
    "mean_estimated_accuracy",
    "mean_objective",
    "oracle_accuracy",
)


def sweep_lambda(
    ds: Dataset,
    lambdas: Sequence[float],
    acc: AccuracyModel | None = None,
    cost: CostModel | None = None,
) -> list[dict]:
    """Cost-sensitive routing with ground-truth labels, one row per lambda."""
    if not lambdas:
        raise ValueError("need at least one lambda")
    acc = acc or AccuracyModel()
    cost = cost or CostModel()
    keys = generate_qa_pack(ds.queries, ds.corpora, ds.labels)
    n = len(ds.queries)
    rows = []
    for lam in lambdas:
        total_cost = total_stores = total_acc = total_obj = correct = 0.0
        for q in ds.queries:
            required = ds.labels[q.id].stores
            chosen, objective = optimal_subset(required, acc, cost, lam)
            total_cost += access_cost(chosen, cost)
            total_stores += len(chosen)
            total_acc += acc.estimate(chosen, required)
            total_obj += objective
            ctx = assemble(RouteDecision(q.id, chosen, "sweep"), ds.corpora[q.id], cost.tokenizer)
            correct += answer_oracle(ctx, keys[q.id]).correct
        rows.append(
            {
                "lambda": lam,
                "mean_access_cost": total_cost / n,
                "mean_stores": total_stores / n,
                "mean_estimated_accuracy": total_acc / n,
                "mean_objective": total_obj / n,
                "oracle_accuracy": correct / n,
            }
        )
    return rows


# -- feature ablation ---------------------------------------------------------

ABLATION_VARIANTS = (
    ("linguistic", "rules"),
    ("+semantic", "semantic"),
    ("+similarity", "hybrid"),
)


def ablate(ds: Dataset, lexicon: Lexicon = DEFAULT_LEXICON, threshold: float | None = None) -> list[dict]:
    """Coverage of the three router variants, each with its delta over the previous row."""
    rows = []
    prev = None
    for label, policy in ABLATION_VARIANTS:
        if policy == "hybrid" and threshold is not None:
            policy = f"hybrid:{threshold}"
        router = make_router(parse_policy(policy), lexicon)
        decisions = [router(q, ds.labels[q.id]) for q in ds.queries]
        m = routing_metrics(ds.label_list(), decisions)
        rows.append(
            {
                "features": label,
                "policy": policy,
                "coverage": m.coverage,
                "exact_match": m.exact_match,
                "delta": None if prev is None else m.coverage - prev,
            }
        )
        prev = m.coverage
    return rows
