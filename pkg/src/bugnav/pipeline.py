"""The two-phase recommendation flow.

Phase one is online: build a search query from the driver issue and
collect candidate issues from the platform. Phase two is offline: fetch
each candidate's thread, patch, and repository snapshot, compare them
against the driver, and re-rank.
"""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

from .config import RunConfig
from .corpus import (
    FixtureStore,
    IssueDocument,
    IssueHit,
    IssueRef,
    LiveTransport,
    PlatformClient,
    ReplayTransport,
    find_patch_refs,
)
from .errors import NoCandidatesError, NotFoundError, ValidationError
from .extract import RepoContext, build_repo_context
from .querygen import QueryOutcome, build_query
from .ranking import RankInput, RankedCandidate, WeightConfig, quality_metrics, rank
from .similarity import similarity_vector

log = logging.getLogger(__name__)

_ISSUE_FILE_KEYS = {"ref", "title", "body", "comments", "state", "labels"}


@dataclass(frozen=True)
class Recommendation:
    driver: IssueDocument
    outcome: QueryOutcome
    weights: WeightConfig
    candidates: List[RankedCandidate]


def build_client(config: RunConfig) -> PlatformClient:
    """Replay transport when fixtures are configured, live otherwise."""
    if config.fixture_dir is not None:
        if not os.path.isdir(config.fixture_dir):
            raise ValidationError(f"fixture directory does not exist: {config.fixture_dir}")
        transport = ReplayTransport(FixtureStore(config.fixture_dir))
    else:
        transport = LiveTransport(token=os.environ.get(config.auth_token_source))
    return PlatformClient(transport, cache_dir=config.cache_dir)


def load_issue_file(path: str) -> IssueDocument:
    """Read a driver issue from a local JSON file.

    Lets users run the recommender on a report that is not filed
    anywhere yet. Patch references are still mined from the text so a
    local copy of an existing issue behaves like the fetched one.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read issue file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"issue file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"issue file {path} must hold a JSON object")
    unknown = set(data) - _ISSUE_FILE_KEYS
    if unknown:
        raise ValidationError(f"unknown issue file keys: {sorted(unknown)}")
    if "ref" not in data:
        raise ValidationError(f"issue file {path} is missing 'ref'")
    try:
        ref = IssueRef.parse(str(data["ref"]))
    except ValueError as exc:
        raise ValidationError(f"issue file {path}: {exc}") from exc
    body = data.get("body") or ""
    comments = [str(c) for c in data.get("comments") or []]
    return IssueDocument(
        ref=ref,
        title=str(data.get("title") or ""),
        body=body,
        comments=comments,
        state=str(data.get("state") or "open"),
        labels=[str(l) for l in data.get("labels") or []],
        num_comments=len(comments),
        is_pull=False,
        patch_refs=find_patch_refs(ref.owner, ref.repo, [body] + comments),
    )


def resolve_driver(source: str, client: PlatformClient) -> IssueDocument:
    """Accept either an OWNER/REPO#N reference or a local issue file."""
    if os.path.exists(source):
        return load_issue_file(source)
    try:
        ref = IssueRef.parse(source)
    except ValueError as exc:
        raise ValidationError(
            f"driver {source!r} is neither an issue reference nor a readable file"
        ) from exc
    return client.fetch_issue(ref)


def _repo_context(client: PlatformClient, owner: str, repo: str) -> RepoContext:
    try:
        snapshot = client.fetch_repo_snapshot(owner, repo)
    except NotFoundError:
        log.warning("no snapshot for %s/%s, comparing without repository context", owner, repo)
        return RepoContext(project=f"{owner}/{repo}")
    return build_repo_context(snapshot)


def recommend(driver: IssueDocument, config: RunConfig, client: PlatformClient) -> Recommendation:
    """Run the full pipeline for one driver issue."""
    driver_ctx = _repo_context(client, driver.ref.owner, driver.ref.repo)

    def search(query):
        return client.search_issues(
            query,
            language=config.language_filter,
            state="closed",
            max_results=config.max_candidates,
        )

    outcome = build_query(
        driver, search, n_threshold=config.n_threshold, scope=config.qualifier_mode
    )
    hits = [hit for hit in outcome.hits if hit.ref != driver.ref]
    if not hits:
        tried = ", ".join(query.strategy for query, _ in outcome.attempts)
        raise NoCandidatesError(
            f"search returned no candidates for {driver.ref} (strategies tried: {tried})"
        )

    def process(hit: IssueHit) -> Optional[RankInput]:
        try:
            issue = client.fetch_issue(hit.ref)
        except NotFoundError:
            log.warning("candidate %s cannot be fetched, dropping it", hit.ref)
            return None
        patch = client.fetch_patch(issue)
        ctx = _repo_context(client, hit.ref.owner, hit.ref.repo)
        sims = similarity_vector(
            driver, driver_ctx, issue, ctx, patch, min_match_len=config.min_match_len
        )
        return RankInput(
            issue=issue,
            metrics=quality_metrics(issue),
            sims=sims,
            search_rank=hit.search_rank,
        )

    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        inputs = [r for r in pool.map(process, hits) if r is not None]
    if not inputs:
        raise NoCandidatesError(f"every candidate for {driver.ref} failed to fetch")
    ranked = rank(inputs, config.weights)
    return Recommendation(driver=driver, outcome=outcome, weights=config.weights, candidates=ranked)


def recommendation_to_dict(rec: Recommendation) -> dict:
    """Audit-friendly form: every factor, weight, and similarity."""
    query = rec.outcome.query
    return {
        "driver": str(rec.driver.ref),
        "query": {
            "strategy": query.strategy,
            "text": query.text,
            "qualifiers": list(query.qualifiers),
            "full": query.full(),
        },
        "attempts": [
            {"strategy": attempt.strategy, "query": attempt.full(), "hits": hits}
            for attempt, hits in rec.outcome.attempts
        ],
        "weights": rec.weights.to_dict(),
        "candidates": [_candidate_to_dict(c) for c in rec.candidates],
    }


def _candidate_to_dict(c: RankedCandidate) -> dict:
    return {
        "final_rank": c.final_rank,
        "search_rank": c.search_rank,
        "ref": str(c.issue.ref),
        "title": c.issue.title,
        "score": c.score,
        "factors": c.factors.to_dict(),
        "similarities": {
            "code": c.sims.code,
            "dependency": c.sims.dependency,
            "permission": c.sims.permission,
            "ui": c.sims.ui,
            "applicable": sorted(c.sims.applicable),
        },
        "metrics": {
            "word_count": c.metrics.word_count,
            "has_fix_commit": c.metrics.has_fix_commit,
            "comment_count": c.metrics.comment_count,
            "keyword_count": c.metrics.keyword_count,
        },
    }
