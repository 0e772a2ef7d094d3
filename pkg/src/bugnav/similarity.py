"""Similarity analyses between a driver bug report and candidate issues.

Four orthogonal signals: token-level code similarity between the driver
repository and a candidate's fix patch, plus overlap of dependencies,
Android permissions, and Android UI elements. Each signal is only
applicable when both sides actually have something to compare; callers
get that distinction through :class:`SimilarityVector.applicable`.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import AbstractSet, Hashable, Optional, Sequence

from . import extract
from .corpus.models import IssueDocument, Patch

DEFAULT_MIN_MATCH_LEN = 9

FACTOR_CODE = "code"
FACTOR_DEPENDENCY = "dependency"
FACTOR_PERMISSION = "permission"
FACTOR_UI = "ui"


def overlap_coefficient(xs: AbstractSet, ys: AbstractSet) -> float:
    """Szymkiewicz-Simpson coefficient; 0.0 when either set is empty."""
    if not xs or not ys:
        return 0.0
    return len(xs & ys) / min(len(xs), len(ys))


def _greedy_tiles(a: Sequence[Hashable], b: Sequence[Hashable], min_match_len: int):
    """Greedy string tiling: repeatedly take the longest common unmarked
    substring, ties resolved in ascending (i, j) order within a round."""
    marked_a = bytearray(len(a))
    marked_b = bytearray(len(b))
    positions = defaultdict(list)
    for j, tok in enumerate(b):
        positions[tok].append(j)

    tiles = []
    while True:
        best = min_match_len - 1
        matches = []
        for i in range(len(a)):
            if marked_a[i]:
                continue
            for j in positions.get(a[i], ()):
                if marked_b[j]:
                    continue
                # a maximal match subsumes all its suffixes, so skip pairs
                # whose predecessor pair would extend the same match
                if (
                    i > 0
                    and j > 0
                    and not marked_a[i - 1]
                    and not marked_b[j - 1]
                    and a[i - 1] == b[j - 1]
                ):
                    continue
                k = 0
                while (
                    i + k < len(a)
                    and j + k < len(b)
                    and not marked_a[i + k]
                    and not marked_b[j + k]
                    and a[i + k] == b[j + k]
                ):
                    k += 1
                if k > best:
                    best = k
                    matches = [(i, j)]
                elif k == best and k >= min_match_len:
                    matches.append((i, j))
        if best < min_match_len:
            return tiles
        for i, j in matches:
            # an earlier tile this round may have occluded this match
            if any(marked_a[i + t] or marked_b[j + t] for t in range(best)):
                continue
            for t in range(best):
                marked_a[i + t] = 1
                marked_b[j + t] = 1
            tiles.append((i, j, best))


def gst_similarity(
    a: Sequence[Hashable],
    b: Sequence[Hashable],
    *,
    min_match_len: int = DEFAULT_MIN_MATCH_LEN,
) -> float:
    """Similarity of two token streams: 2*coverage / (len(a) + len(b))."""
    if min_match_len < 1:
        raise ValueError("min_match_len must be >= 1")
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    covered = sum(length for _, _, length in _greedy_tiles(a, b, min_match_len))
    return 2.0 * covered / (len(a) + len(b))


def code_similarity(
    driver: extract.RepoContext,
    patch: Patch,
    *,
    min_match_len: int = DEFAULT_MIN_MATCH_LEN,
    exact: bool = False,
) -> Optional[float]:
    """Best token similarity between any driver source file and any file
    touched by the patch, or None when either side has nothing to compare.

    Identifier texts are abstracted to their token kind unless ``exact``.
    Patch entries without fetched content can't be tokenized and are
    skipped.
    """
    driver_streams = [
        stream.exact() if exact else stream.kinds()
        for stream in driver.code_files.values()
    ]
    patch_streams = []
    for modified in patch.files:
        if not modified.path.endswith(".java") or modified.new_content is None:
            continue
        stream = extract.tokenize_code(modified.new_content)
        patch_streams.append(stream.exact() if exact else stream.kinds())
    if not driver_streams or not patch_streams:
        return None
    return max(
        gst_similarity(d, p, min_match_len=min_match_len)
        for d in driver_streams
        for p in patch_streams
    )


@dataclass(frozen=True)
class SimilarityVector:
    """Per-factor similarity in [0, 1]; a factor outside ``applicable``
    carries 0.0 and means "nothing to compare", not "compared and failed"."""

    code: float = 0.0
    dependency: float = 0.0
    permission: float = 0.0
    ui: float = 0.0
    applicable: frozenset = field(default_factory=frozenset)


def _mention_aware_overlap(
    driver_issue: IssueDocument,
    declared: AbstractSet[str],
    candidate_side: AbstractSet[str],
    vocabulary,
) -> float:
    """Overlap where the driver side is its declared set widened by
    candidate-vocabulary terms mentioned in the report thread."""
    driver_side = set(declared)
    driver_side |= extract.extract_mentions(driver_issue, vocabulary)
    return overlap_coefficient(driver_side, candidate_side)


def similarity_vector(
    driver_issue: IssueDocument,
    driver_ctx: extract.RepoContext,
    candidate_issue: IssueDocument,
    candidate_ctx: extract.RepoContext,
    patch: Optional[Patch],
    *,
    min_match_len: int = DEFAULT_MIN_MATCH_LEN,
) -> SimilarityVector:
    """Compare a driver report against one candidate across all factors.

    The driver's dependency/permission/UI sets are widened with terms
    from the candidate's declared vocabulary that the report text
    mentions, so a report that names a library counts as depending on
    it even if the driver project never declares it.
    """
    applicable = set()
    code = 0.0
    if patch is not None:
        best = code_similarity(driver_ctx, patch, min_match_len=min_match_len)
        if best is not None:
            code = best
            applicable.add(FACTOR_CODE)

    dependency = 0.0
    cand_deps = {d.canonical for d in candidate_ctx.dependencies}
    vocab = {d.canonical: d.artifact for d in candidate_ctx.dependencies}
    driver_deps = {d.canonical for d in driver_ctx.dependencies}
    driver_deps |= extract.extract_mentions(driver_issue, vocab)
    if driver_deps and cand_deps:
        dependency = overlap_coefficient(driver_deps, cand_deps)
        applicable.add(FACTOR_DEPENDENCY)

    permission = 0.0
    ui = 0.0
    if driver_ctx.is_android and candidate_ctx.is_android:
        permission = _mention_aware_overlap(
            driver_issue,
            driver_ctx.permissions,
            candidate_ctx.permissions,
            candidate_ctx.permissions,
        )
        applicable.add(FACTOR_PERMISSION)
        ui = _mention_aware_overlap(
            driver_issue,
            driver_ctx.ui_elements,
            candidate_ctx.ui_elements,
            candidate_ctx.ui_elements,
        )
        applicable.add(FACTOR_UI)

    return SimilarityVector(
        code=code,
        dependency=dependency,
        permission=permission,
        ui=ui,
        applicable=frozenset(applicable),
    )
