"""Issue-quality metrics, factor normalization, and weighted re-ranking.

A candidate's score is a plain dot product of its normalized factor
vector with a weight vector. The shipped default weights put most of
the mass on the similarity analyses and none on the has-fix and
keyword factors; those stay available for tuning.
"""

from __future__ import annotations

import dataclasses
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from .corpus.models import IssueDocument
from .errors import ValidationError
from .similarity import SimilarityVector

DEFAULT_KEYWORDS = frozenset(
    {
        "reproduce",
        "defect",
        "crash",
        "error",
        "exception",
        "expected",
        "actual",
        "steps",
        "fix",
    }
)

WORD_COUNT_CAP = 500
COMMENT_COUNT_CAP = 20
KEYWORD_COUNT_CAP = 5

_KEYWORD_TOKEN_RE = re.compile(r"[a-z0-9_]+")


@dataclass(frozen=True)
class QualityMetrics:
    word_count: int
    has_fix_commit: bool
    comment_count: int
    keyword_count: int

    def __post_init__(self):
        for name in ("word_count", "comment_count", "keyword_count"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")


@dataclass(frozen=True)
class WeightConfig:
    w_issue_length: float = 0.0714
    w_num_comment: float = 0.1428
    w_code: float = 0.1428
    w_dep: float = 0.2142
    w_perm: float = 0.2142
    w_ui: float = 0.2142
    w_has_fix: float = 0.0
    w_keywords: float = 0.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 0:
                raise ValidationError(f"{f.name} must be non-negative")

    def as_tuple(self) -> Tuple[float, ...]:
        return dataclasses.astuple(self)

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "WeightConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown weight names: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class FactorVector:
    """Normalized factors, one per weight, all in [0, 1]."""

    issue_length: float = 0.0
    num_comment: float = 0.0
    code: float = 0.0
    dep: float = 0.0
    perm: float = 0.0
    ui: float = 0.0
    has_fix: float = 0.0
    keywords: float = 0.0

    def as_tuple(self) -> Tuple[float, ...]:
        return dataclasses.astuple(self)

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "FactorVector":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown factor names: {sorted(unknown)}")
        return cls(**{name: float(data.get(name, 0.0)) for name in known})


def count_keywords(texts: Iterable[str], keywords=DEFAULT_KEYWORDS) -> int:
    """Total whole-word, case-insensitive keyword occurrences."""
    total = 0
    for text in texts:
        for token in _KEYWORD_TOKEN_RE.findall(text.lower()):
            if token in keywords:
                total += 1
    return total


def quality_metrics(issue: IssueDocument, *, keywords=DEFAULT_KEYWORDS) -> QualityMetrics:
    """Content-quality signals of a candidate issue.

    Words are counted in the body alone; keywords over body plus
    comments (the title is a search artifact, not report content).
    """
    body = issue.body or ""
    return QualityMetrics(
        word_count=len(body.split()),
        # A pull request is a patch even when its text links none.
        has_fix_commit=bool(issue.patch_refs) or issue.is_pull,
        comment_count=issue.num_comments,
        keyword_count=count_keywords([body, *issue.comments], keywords),
    )


def normalize_factors(
    metrics: QualityMetrics,
    sims: SimilarityVector,
    *,
    word_cap: int = WORD_COUNT_CAP,
    comment_cap: int = COMMENT_COUNT_CAP,
    keyword_cap: int = KEYWORD_COUNT_CAP,
) -> FactorVector:
    """Map raw counts onto [0, 1]; similarity components pass through
    (non-applicable ones already carry 0)."""
    return FactorVector(
        issue_length=min(1.0, metrics.word_count / word_cap),
        num_comment=min(1.0, metrics.comment_count / comment_cap),
        code=sims.code,
        dep=sims.dependency,
        perm=sims.permission,
        ui=sims.ui,
        has_fix=1.0 if metrics.has_fix_commit else 0.0,
        keywords=min(1.0, metrics.keyword_count / keyword_cap),
    )


def score(factors: FactorVector, weights: WeightConfig) -> float:
    """Weighted sum of factors."""
    return sum(f * w for f, w in zip(factors.as_tuple(), weights.as_tuple()))


@dataclass(frozen=True)
class RankInput:
    issue: IssueDocument
    metrics: QualityMetrics
    sims: SimilarityVector
    search_rank: int


@dataclass(frozen=True)
class RankedCandidate:
    issue: IssueDocument
    metrics: QualityMetrics
    sims: SimilarityVector
    factors: FactorVector
    score: float
    search_rank: int
    final_rank: int


def rank(
    candidates: Sequence[RankInput],
    weights: WeightConfig,
    *,
    word_cap: int = WORD_COUNT_CAP,
    comment_cap: int = COMMENT_COUNT_CAP,
    keyword_cap: int = KEYWORD_COUNT_CAP,
) -> List[RankedCandidate]:
    """Order candidates by score, best first; the first element is the
    recommended navigator. Ties keep the platform's search order."""
    seen = {c.search_rank for c in candidates}
    if len(seen) != len(candidates):
        raise ValidationError("candidates must carry distinct search ranks")
    scored = []
    for cand in candidates:
        factors = normalize_factors(
            cand.metrics,
            cand.sims,
            word_cap=word_cap,
            comment_cap=comment_cap,
            keyword_cap=keyword_cap,
        )
        scored.append((cand, factors, score(factors, weights)))
    scored.sort(key=lambda item: (-item[2], item[0].search_rank))
    return [
        RankedCandidate(
            issue=cand.issue,
            metrics=cand.metrics,
            sims=cand.sims,
            factors=factors,
            score=value,
            search_rank=cand.search_rank,
            final_rank=position,
        )
        for position, (cand, factors, value) in enumerate(scored, start=1)
    ]


# Published rounding: the six weights are fourteenths truncated to four
# decimals, so an on-grid sum lands at 0.9996 rather than 1.
_SIMPLEX_TOLERANCE = 4e-4 + 1e-9


def _swept_grid(base: WeightConfig, grid_step: float) -> List[Tuple[float, float, float, float]]:
    """All (w_code, w_dep, w_perm, w_ui) multiples of grid_step that,
    with the fixed quality weights, sum to ~1. Lexicographic order."""
    fixed = base.w_issue_length + base.w_num_comment
    max_units = int(round(1.0 / grid_step))
    totals = [
        t
        for t in range(max_units + 1)
        if abs(fixed + t * grid_step - 1.0) <= _SIMPLEX_TOLERANCE
    ]
    grid = []
    for total in totals:
        for k_code in range(total + 1):
            for k_dep in range(total - k_code + 1):
                for k_perm in range(total - k_code - k_dep + 1):
                    k_ui = total - k_code - k_dep - k_perm
                    grid.append(
                        (
                            k_code * grid_step,
                            k_dep * grid_step,
                            k_perm * grid_step,
                            k_ui * grid_step,
                        )
                    )
    grid.sort()
    return grid


def tune_weights(dataset, grid_step: float, *, base: WeightConfig = None) -> WeightConfig:
    """Exhaustive grid search over the similarity weights, keeping the
    quality weights fixed; returns the MRR-maximizing configuration.

    Ties go to the lexicographically smallest weight tuple. A step too
    coarse to hit the simplex at all evaluates just the base weights
    and returns them.
    """
    from .evalharness import evaluate

    if not dataset.entries:
        raise ValidationError("tuning needs a non-empty dataset")
    if not 0.0 < grid_step <= 1.0:
        raise ValidationError("grid_step must be in (0, 1]")
    if base is None:
        base = WeightConfig()

    grid = _swept_grid(base, grid_step)
    if not grid:
        evaluate(dataset, base)
        return base

    def evaluate_point(swept):
        weights = dataclasses.replace(
            base, w_code=swept[0], w_dep=swept[1], w_perm=swept[2], w_ui=swept[3]
        )
        return evaluate(dataset, weights).per_system["reranked"].mrr, weights

    with ThreadPoolExecutor() as pool:
        results = list(pool.map(evaluate_point, grid))

    # grid is sorted ascending, so keeping strict improvements leaves
    # the lexicographically smallest tuple as the tie winner
    best_mrr, best_weights = results[0]
    for mrr, weights in results[1:]:
        if mrr > best_mrr:
            best_mrr, best_weights = mrr, weights
    return best_weights
