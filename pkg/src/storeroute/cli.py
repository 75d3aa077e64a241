"""Command-line entry point: generate, eval, bench, sweep-lambda, ablate, report."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import (
    accuracy_model_from,
    cost_model_from,
    get,
    lexicon_from,
    parse_mix,
    read_config,
    split_list,
    store_costs_text,
)
from .core import ConfigError, DatasetError
from .evaluate import SWEEP_COLUMNS, ablate, evaluate_policies, sweep_lambda
from .policies import BENCH_POLICIES
from .qa import ClientConfig, ExternalLLMError, make_answerer
from .synthgen import DATA_FILES, GeneratorConfig, generate_dataset, load_dataset, sha256_file, write_dataset

log = logging.getLogger("storeroute")

DEFAULT_LAMBDAS = "0,0.01,0.02,0.05,0.1,0.2,0.3,0.5,1,2,5,10"

EXIT_CONFIG, EXIT_DATA, EXIT_IO, EXIT_EXTERNAL = 2, 3, 4, 5


def _pick(cli_value, parser, section, key, cast=str, default=None):
    """CLI flag wins over the config file, which wins over the default."""
    if cli_value is not None:
        return cli_value
    raw = get(parser, section, key)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from None


def _write_manifest(out: Path, command: str, settings: dict, data_dir: Optional[Path] = None) -> None:
    manifest = {"command": command, "settings": settings, "outputs": {}}
    if data_dir is not None:
        manifest["inputs"] = {
            name: sha256_file(data_dir / name) for name in DATA_FILES if (data_dir / name).exists()
        }
    for p in sorted(out.iterdir()):
        if p.is_file() and p.name != "manifest.json":
            manifest["outputs"][p.name] = sha256_file(p)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_rows(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row[k] is None else row[k] for k in columns})


def _table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.4f}"
        return str(v)

    body = [[cell(r[c]) for c in columns] for r in rows]
    widths = [max(len(c), *(len(b[i]) for b in body)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(b, widths)) for b in body]
    return "\n".join(lines)


# -- commands -----------------------------------------------------------------


def cmd_generate(args, parser) -> int:
    mix_text = _pick(args.mix, parser, "synthgen", "mix")
    config = GeneratorConfig(
        n_queries=_pick(args.n, parser, "synthgen", "n_queries", int, 1000),
        type_mix=parse_mix(mix_text) if mix_text else None,
        split_ratio=_pick(args.split_ratio, parser, "synthgen", "split_ratio", float, 0.7),
        seed=_pick(args.seed, parser, "synthgen", "seed", int, 42),
        regime=_pick(args.regime, parser, "synthgen", "regime", str, "short"),
        distractor_rate=_pick(args.distractor_rate, parser, "synthgen", "distractor_rate", float, 0.2),
    )
    ds = generate_dataset(config)
    manifest = write_dataset(ds, args.out)
    counts = manifest["counts"]
    print(f"wrote {counts['queries']} queries to {args.out} (train {counts['train']} / test {counts['test']})")
    for qtype, count in counts["by_type"].items():
        print(f"  {qtype:<17} {count}")
    return 0


def _eval_common(args, parser, policies: Sequence[str], command: str) -> int:
    data_dir = Path(args.data)
    split = _pick(args.split, parser, "eval", "split", str, "test")
    ds = load_dataset(data_dir).select(split)
    if not ds.queries:
        raise DatasetError("selected split is empty")
    cost = cost_model_from(parser)
    acc = accuracy_model_from(parser, alpha=args.alpha, beta=args.beta, gamma=args.gamma)
    lexicon = lexicon_from(parser)
    answerer_kind = _pick(args.answerer, parser, "qa", "answerer", str, "oracle")
    noise = _pick(args.noise, parser, "qa", "noise", float, 0.0)
    seed = _pick(args.seed, parser, "eval", "seed", int, 0)
    client = None
    workers = 1
    if answerer_kind == "external-llm":
        client = ClientConfig.from_env()
        client.endpoint = _pick(args.endpoint, parser, "qa", "endpoint", str, client.endpoint)
        client.model = _pick(args.model, parser, "qa", "model", str, client.model)
        client.max_in_flight = _pick(args.max_in_flight, parser, "qa", "max_in_flight", int, client.max_in_flight)
        client.audit_log = _pick(args.audit_log, parser, "qa", "audit_log", str, None)
        workers = client.max_in_flight
    try:
        answerer = make_answerer(answerer_kind, noise, seed, client)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    baseline = _pick(args.baseline, parser, "eval", "baseline", str, None)
    if baseline is not None and baseline not in policies:
        raise ConfigError(f"baseline {baseline!r} is not among the evaluated policies")
    iterations = _pick(args.bootstrap_iterations, parser, "eval", "bootstrap_iterations", int, 1000)
    report = evaluate_policies(
        ds, policies, answerer, lexicon, acc, cost, baseline, iterations, seed, workers
    )
    report.meta = {
        "command": command,
        "data": str(data_dir),
        "split": split,
        "answerer": answerer_kind,
        "noise": noise,
        "seed": seed,
        "n": len(ds.queries),
        "costs": store_costs_text(cost),
        "accuracy_model": {"alpha": acc.alpha, "beta": acc.beta, "gamma": acc.gamma},
    }
    columns = ["policy", "coverage", "exact_match", "waste", "mean_tokens", "mean_access_cost", "qa_accuracy"]
    print(_table([r.row() for r in report.results], columns))
    errors = sum(1 for r in report.results for a in r.answers.values() if a.error)
    if errors:
        print(f"warning: {errors} external answers failed and were scored incorrect", file=sys.stderr)
    if report.comparisons:
        print(f"\npaired bootstrap vs {report.baseline} ({iterations} iterations):")
        for name, b in report.comparisons.items():
            flag = "*" if b.significant else " "
            print(f"  {name:<16} delta={b.delta:+.4f}  95% CI [{b.ci_low:+.4f}, {b.ci_high:+.4f}] {flag}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n")
        (out / "report.csv").write_text(report.to_csv())
        _write_manifest(out, command, report.meta, data_dir)
        print(f"\nreport written to {out}")
    return 0


def cmd_eval(args, parser) -> int:
    text = args.policies or get(parser, "eval", "policies", "oracle,uniform,hybrid,rules")
    policies = split_list(text)
    if not policies:
        raise ConfigError("no policies given")
    return _eval_common(args, parser, policies, "eval")


def cmd_bench(args, parser) -> int:
    if args.baseline is None and get(parser, "eval", "baseline") is None:
        args.baseline = "uniform"
    return _eval_common(args, parser, BENCH_POLICIES, "bench")


def cmd_sweep(args, parser) -> int:
    data_dir = Path(args.data)
    ds = load_dataset(data_dir).select(args.split)
    try:
        lambdas = [float(x) for x in split_list(args.lambdas)]
    except ValueError:
        raise ConfigError(f"bad lambda list: {args.lambdas!r}") from None
    if not lambdas:
        raise ConfigError("lambda list is empty")
    if any(lam < 0 for lam in lambdas):
        raise ConfigError("lambdas must be non-negative")
    acc = accuracy_model_from(parser, alpha=args.alpha, beta=args.beta, gamma=args.gamma)
    cost = cost_model_from(parser)
    rows = sweep_lambda(ds, lambdas, acc, cost)
    print(_table(rows, SWEEP_COLUMNS))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / "sweep.csv", SWEEP_COLUMNS, rows)
        settings = {
            "split": args.split,
            "lambdas": lambdas,
            "accuracy_model": {"alpha": acc.alpha, "beta": acc.beta, "gamma": acc.gamma},
            "costs": store_costs_text(cost),
        }
        _write_manifest(out, "sweep-lambda", settings, data_dir)
        print(f"\ncurve written to {out / 'sweep.csv'}")
    return 0


def cmd_ablate(args, parser) -> int:
    data_dir = Path(args.data)
    ds = load_dataset(data_dir).select(args.split)
    threshold = _pick(args.threshold, parser, "policies", "threshold", float, None)
    rows = ablate(ds, lexicon_from(parser), threshold)
    columns = ("features", "policy", "coverage", "exact_match", "delta")
    print(_table(rows, columns))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / "ablation.csv", columns, rows)
        (out / "ablation.json").write_text(json.dumps(rows, indent=2) + "\n")
        _write_manifest(out, "ablate", {"split": args.split, "threshold": threshold}, data_dir)
    return 0


def cmd_report(args, parser) -> int:
    path = Path(args.report)
    if path.is_dir():
        path = path / "report.json"
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise DatasetError(f"no report at {path}") from None
    columns = ["policy", "coverage", "exact_match", "waste", "mean_tokens", "mean_access_cost", "qa_accuracy", "n"]
    print(_table(data["policies"], columns))
    if args.by_type:
        for row in data["policies"]:
            print(f"\n{row['policy']}")
            sub = [{"type": t, **m} for t, m in row["by_type"].items()]
            print(_table(sub, ["type", "coverage", "exact_match", "waste", "qa_accuracy", "n"]))
    return 0


# -- argument parsing ---------------------------------------------------------


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="accuracy when all required stores are selected")
    p.add_argument("--beta", type=float, help="accuracy when a required store is missing")
    p.add_argument("--gamma", type=float, help="accuracy penalty per unneeded store")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="storeroute", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--config", help="INI config file (CLI flags override it)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a labeled synthetic dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--regime", choices=("short", "long", "mixed"))
    g.add_argument("--mix", help="query type weights, e.g. temporal=1,single_hop=2")
    g.add_argument("--split-ratio", type=float)
    g.add_argument("--distractor-rate", type=float)
    g.set_defaults(func=cmd_generate)

    for name, func, help_text in (
        ("eval", cmd_eval, "evaluate routing policies"),
        ("bench", cmd_bench, "evaluate the twelve fixed/adaptive policies of the full comparison"),
    ):
        e = sub.add_parser(name, help=help_text)
        e.add_argument("--data", required=True)
        if name == "eval":
            e.add_argument("--policies", help="comma-separated policy strings")
        e.add_argument("--answerer", choices=("oracle", "noisy-oracle", "external-llm"))
        e.add_argument("--noise", type=float, help="distractor confusion probability (noisy-oracle)")
        e.add_argument("--split", choices=("train", "test", "all"))
        e.add_argument("--baseline", help="policy to bootstrap the others against")
        e.add_argument("--bootstrap-iterations", type=int)
        e.add_argument("--seed", type=int)
        e.add_argument("--endpoint")
        e.add_argument("--model")
        e.add_argument("--max-in-flight", type=int)
        e.add_argument("--audit-log")
        e.add_argument("--out")
        _add_model_flags(e)
        e.set_defaults(func=func)

    s = sub.add_parser("sweep-lambda", help="trace the cost-sensitive policy over lambda")
    s.add_argument("--data", required=True)
    s.add_argument("--lambdas", default=DEFAULT_LAMBDAS)
    s.add_argument("--split", default="test", choices=("train", "test", "all"))
    s.add_argument("--out")
    _add_model_flags(s)
    s.set_defaults(func=cmd_sweep)

    a = sub.add_parser("ablate", help="coverage of linguistic / +semantic / +similarity routers")
    a.add_argument("--data", required=True)
    a.add_argument("--split", default="test", choices=("train", "test", "all"))
    a.add_argument("--threshold", type=float)
    a.add_argument("--out")
    a.set_defaults(func=cmd_ablate)

    r = sub.add_parser("report", help="print tables from a saved report.json")
    r.add_argument("report", help="report.json or the directory holding it")
    r.add_argument("--by-type", action="store_true")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        parser = read_config(args.config)
        return args.func(args, parser)
    except ConfigError as exc:
        print(f"error: ConfigError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"error: DatasetError: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ExternalLLMError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
