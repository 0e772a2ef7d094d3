"""Command-line entry point: recommend, evaluate, mine, tune."""

import argparse
import json
import sys
from typing import List, Optional

from . import pipeline
from .config import OUTPUT_FORMATS, QUALIFIER_MODES, RunConfig
from .corpus import MINING_PHRASES, mine_similar_pairs
from .errors import (
    NoCandidatesError,
    QueryConstructionError,
    RateLimitError,
    TransportError,
    ValidationError,
)
from .evalharness import EvalDataset, evaluate
from .ranking import WeightConfig, tune_weights

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_CANDIDATES = 2
EXIT_NO_QUERY = 3
EXIT_TRANSPORT = 4


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON file with configuration fields")
    parser.add_argument("--fixture-dir", dest="fixture_dir", metavar="DIR",
                        help="replay recorded fixtures instead of touching the network")
    parser.add_argument("--cache-dir", dest="cache_dir", metavar="DIR",
                        help="directory for repository snapshot caching")
    parser.add_argument("--token-env", dest="auth_token_source", metavar="VAR",
                        help="environment variable holding the API token")
    parser.add_argument("--language", dest="language_filter", metavar="LANG",
                        help="search language filter; empty string disables it")
    parser.add_argument("--max-candidates", dest="max_candidates", type=int)
    parser.add_argument("--n-threshold", dest="n_threshold", type=int,
                        help="minimum hits before a query strategy is accepted")
    parser.add_argument("--scope", dest="qualifier_mode", choices=QUALIFIER_MODES,
                        help="where the stack-trace query searches")
    parser.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS)
    parser.add_argument("--parallelism", dest="parallelism", type=int)
    parser.add_argument("--min-match-len", dest="min_match_len", type=int)
    parser.add_argument("--weight", action="append", default=[], metavar="NAME=VALUE",
                        help="override one ranking weight; repeatable")
    parser.add_argument("--weights-file", dest="weights_file", metavar="FILE",
                        help="JSON file with a full set of ranking weights")


_OVERRIDE_FIELDS = (
    "fixture_dir",
    "cache_dir",
    "auth_token_source",
    "language_filter",
    "max_candidates",
    "n_threshold",
    "qualifier_mode",
    "output_format",
    "parallelism",
    "min_match_len",
)


def _load_weights_file(path: str) -> WeightConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read weights file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"weights file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"weights file {path} must hold a JSON object")
    return WeightConfig.from_dict(data)


def _apply_weight_overrides(weights: WeightConfig, specs: List[str]) -> WeightConfig:
    data = weights.to_dict()
    for spec in specs:
        name, sep, raw = spec.partition("=")
        if not sep:
            raise ValidationError(f"--weight expects NAME=VALUE, got {spec!r}")
        if name not in data:
            raise ValidationError(f"unknown weight name: {name!r}")
        try:
            data[name] = float(raw)
        except ValueError as exc:
            raise ValidationError(f"--weight {name}: {raw!r} is not a number") from exc
    return WeightConfig.from_dict(data)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.load(args.config) if args.config else RunConfig()
    data = base.to_dict()
    for name in _OVERRIDE_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    weights = base.weights
    if getattr(args, "weights_file", None):
        weights = _load_weights_file(args.weights_file)
    if getattr(args, "weight", None):
        weights = _apply_weight_overrides(weights, args.weight)
    data["weights"] = weights
    return RunConfig.from_dict(data)


def _load_dataset(path: str) -> EvalDataset:
    try:
        return EvalDataset.load(path)
    except OSError as exc:
        raise ValidationError(f"cannot read dataset {path}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise ValidationError(f"dataset {path} is malformed: {exc}") from exc


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _recommend_table(rec: pipeline.Recommendation) -> str:
    lines = [
        f"driver: {rec.driver.ref}",
        f"query ({rec.outcome.query.strategy}): {rec.outcome.query.full()}",
        "",
        f"{'rank':>4}  {'score':>8}  {'search':>6}  candidate",
    ]
    for c in rec.candidates:
        lines.append(
            f"{c.final_rank:>4}  {c.score:>8.4f}  {c.search_rank:>6}  "
            f"{c.issue.ref}  {c.issue.title}"
        )
    return "\n".join(lines)


def _cmd_recommend(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    client = pipeline.build_client(config)
    driver = pipeline.resolve_driver(args.issue, client)
    rec = pipeline.recommend(driver, config, client)
    if config.output_format == "table":
        print(_recommend_table(rec))
    else:
        print(json.dumps(pipeline.recommendation_to_dict(rec), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = evaluate(_load_dataset(args.dataset), config.weights)
    if config.output_format == "table":
        print(report.format_table())
    else:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_mine(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    client = pipeline.build_client(config)
    keywords = tuple(args.keyword) if args.keyword else MINING_PHRASES
    pairs = mine_similar_pairs(client, keywords=keywords, per_keyword_cap=args.cap)
    _emit("".join(f"{d} {n}\n" for d, n in pairs), args.output)
    return EXIT_OK


def _cmd_tune(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    tuned = tune_weights(_load_dataset(args.dataset), args.grid_step, base=config.weights)
    payload = json.dumps(tuned.to_dict(), indent=2, sort_keys=True) + "\n"
    _emit(payload, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bugnav",
        description="Recommend closed lookalike issues for an open bug report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recommend", help="rank candidate issues for one driver issue")
    p.add_argument("issue", help="OWNER/REPO#N or a local issue JSON file")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_recommend)

    p = sub.add_parser("evaluate", help="score a labeled dataset with the current weights")
    p.add_argument("dataset", help="JSONL dataset file")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("mine", help="collect cross-project (driver, navigator) pairs")
    p.add_argument("--keyword", action="append", default=[],
                   help="search phrase; repeatable, defaults to the built-in pair")
    p.add_argument("--cap", type=int, default=100, help="search results per keyword")
    p.add_argument("--output", metavar="FILE", help="also write the pair list here")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("tune", help="grid-search similarity weights on a labeled dataset")
    p.add_argument("dataset", help="JSONL dataset file")
    p.add_argument("--grid-step", type=float, default=0.0714)
    p.add_argument("--output", metavar="FILE", help="also write the tuned weights here")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_tune)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QueryConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_QUERY
    except NoCandidatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CANDIDATES
    except RateLimitError as exc:
        hint = "" if exc.retry_after is None else f" (retry after {exc.retry_after:.0f}s)"
        print(f"error: {exc}{hint}", file=sys.stderr)
        return EXIT_TRANSPORT
    except TransportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
