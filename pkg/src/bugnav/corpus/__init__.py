from bugnav.corpus.client import DEFAULT_SNAPSHOT_GLOBS, PlatformClient, match_glob
from bugnav.corpus.fixtures import FixtureStore, canonical_key
from bugnav.corpus.miner import MINING_PHRASES, mine_similar_pairs
from bugnav.corpus.models import (
    MAX_QUERY_LEN,
    IssueDocument,
    IssueHit,
    IssueRef,
    ModifiedFile,
    Patch,
    PatchRef,
    RepoSnapshot,
    SearchQuery,
    find_cross_repo_issue_ref,
    find_patch_refs,
)
from bugnav.corpus.transport import (
    LiveTransport,
    RecordingTransport,
    ReplayTransport,
    TokenBucket,
    perform,
)

__all__ = [
    "DEFAULT_SNAPSHOT_GLOBS",
    "FixtureStore",
    "IssueDocument",
    "IssueHit",
    "IssueRef",
    "LiveTransport",
    "MAX_QUERY_LEN",
    "MINING_PHRASES",
    "ModifiedFile",
    "Patch",
    "PatchRef",
    "PlatformClient",
    "RecordingTransport",
    "RepoSnapshot",
    "ReplayTransport",
    "SearchQuery",
    "TokenBucket",
    "canonical_key",
    "find_cross_repo_issue_ref",
    "find_patch_refs",
    "match_glob",
    "mine_similar_pairs",
    "perform",
]
