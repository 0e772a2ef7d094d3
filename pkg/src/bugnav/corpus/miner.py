"""Mining driver/navigator issue pairs from "similar bug" mentions.

An issue whose thread says it shares a bug with an issue in a
different project is a labeled example of the relation the
recommender tries to reproduce. The miner only applies the two
mechanical rules (phrase match, first cross-repository link); it
cannot filter out junk the way a human labeler would.
"""

from __future__ import annotations

import logging
from typing import List, Sequence, Tuple

from ..errors import ValidationError
from .models import SearchQuery
from .client import SEARCH_RESULT_LIMIT, PlatformClient
from .models import IssueRef, find_cross_repo_issue_ref

log = logging.getLogger(__name__)

MINING_PHRASES = ("similar bug", "similar problem")


def mine_similar_pairs(
    client: PlatformClient,
    keywords: Sequence[str] = MINING_PHRASES,
    per_keyword_cap: int = 100,
) -> List[Tuple[IssueRef, IssueRef]]:
    """(driver, navigator) pairs where the driver's thread names the
    phrase and links an issue in another project. Deduplicated, in
    discovery order."""
    if not 1 <= per_keyword_cap <= SEARCH_RESULT_LIMIT:
        raise ValidationError(f"per_keyword_cap must be in 1..{SEARCH_RESULT_LIMIT}")
    pairs: List[Tuple[IssueRef, IssueRef]] = []
    seen = set()
    for phrase in keywords:
        query = SearchQuery(
            text=f'"{phrase}"', qualifiers=("in:body,comments",), strategy="phrase"
        )
        hits = client.search_issues(query, state=None, max_results=per_keyword_cap)
        log.info("phrase %r matched %d issues", phrase, len(hits))
        for hit in hits:
            issue = client.fetch_issue(hit.ref)
            target = find_cross_repo_issue_ref(
                hit.ref.owner, hit.ref.repo, issue.thread_texts()
            )
            if target is None:
                continue
            pair = (hit.ref, target)
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
    return pairs
