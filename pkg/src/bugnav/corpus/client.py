"""High-level platform operations over any transport.

Everything here is transport-agnostic: point it at a live transport
for real runs, at a replay transport for tests and demos.
"""

from __future__ import annotations

import base64
import functools
import hashlib
import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ..errors import NotFoundError, ValidationError
from .models import (
    MAX_QUERY_LEN,
    IssueDocument,
    IssueHit,
    IssueRef,
    ModifiedFile,
    Patch,
    PatchRef,
    RepoSnapshot,
    SearchQuery,
    find_patch_refs,
)
from .transport import perform

log = logging.getLogger(__name__)

DEFAULT_SNAPSHOT_GLOBS = (
    "**/*.java",
    "**/pom.xml",
    "**/build.gradle*",
    "**/AndroidManifest.xml",
    "**/res/layout/**/*.xml",
)

SEARCH_RESULT_LIMIT = 1000
_PAGE_SIZE = 100


@functools.lru_cache(maxsize=256)
def _glob_regex(pattern: str):
    """Compile a path glob where `**` spans zero or more whole segments
    and `*` never crosses a slash."""
    pieces = []
    for segment in pattern.split("/"):
        if segment == "**":
            pieces.append("**")
        else:
            pieces.append(
                "".join(
                    "[^/]*" if ch == "*" else "[^/]" if ch == "?" else re.escape(ch)
                    for ch in segment
                )
            )
    regex = ""
    for i, piece in enumerate(pieces):
        last = i == len(pieces) - 1
        if piece == "**":
            regex += ".*" if last else "(?:[^/]+/)*"
        else:
            regex += piece + ("" if last else "/")
    return re.compile(regex)


def match_glob(path: str, pattern: str) -> bool:
    return _glob_regex(pattern).fullmatch(path) is not None


class PlatformClient:
    def __init__(self, transport, *, cache_dir=None):
        self._transport = transport
        self._cache_dir = Path(cache_dir) if cache_dir else None

    def _call(self, endpoint: str, **params: str):
        return perform(self._transport, endpoint, params)

    # -- search ---------------------------------------------------------

    def search_issues(
        self,
        query: SearchQuery,
        *,
        language: Optional[str] = None,
        state: Optional[str] = "closed",
        max_results: int = 100,
    ) -> List[IssueHit]:
        """First-phase retrieval: hits in platform order, ranked 1..k."""
        if not query.text.strip():
            raise ValidationError("search query text is empty")
        if len(query.full()) > MAX_QUERY_LEN:
            raise ValidationError(
                f"search query exceeds {MAX_QUERY_LEN} characters: {len(query.full())}"
            )
        if not 1 <= max_results <= SEARCH_RESULT_LIMIT:
            raise ValidationError(f"max_results must be in 1..{SEARCH_RESULT_LIMIT}")
        q = query.full()
        if language:
            q += f" language:{language}"
        if state:
            q += f" state:{state}"

        hits: List[IssueHit] = []
        page = 1
        while len(hits) < max_results:
            payload = self._call(
                "search_issues", q=q, page=str(page), per_page=str(_PAGE_SIZE)
            )
            items = payload.get("items", [])
            for item in items:
                if len(hits) >= max_results:
                    break
                hits.append(
                    IssueHit(
                        ref=_item_ref(item),
                        title=item.get("title", ""),
                        search_rank=len(hits) + 1,
                        is_pull="pull_request" in item,
                    )
                )
            if len(items) < _PAGE_SIZE:
                break
            page += 1
        return hits

    # -- issues ----------------------------------------------------------

    def fetch_issue(self, ref: IssueRef) -> IssueDocument:
        payload = self._call(
            "get_issue", owner=ref.owner, repo=ref.repo, number=str(ref.number)
        )
        comments = self._list_comments(ref)
        body = payload.get("body") or ""
        labels = [
            entry["name"] if isinstance(entry, dict) else str(entry)
            for entry in payload.get("labels", [])
        ]
        return IssueDocument(
            ref=ref,
            title=payload.get("title", ""),
            body=body,
            comments=comments,
            state=payload.get("state", "open"),
            labels=labels,
            num_comments=int(payload.get("comments", len(comments))),
            is_pull="pull_request" in payload,
            patch_refs=find_patch_refs(ref.owner, ref.repo, [body] + comments),
        )

    def _list_comments(self, ref: IssueRef) -> List[str]:
        comments: List[str] = []
        page = 1
        while True:
            payload = self._call(
                "list_comments",
                owner=ref.owner,
                repo=ref.repo,
                number=str(ref.number),
                page=str(page),
                per_page=str(_PAGE_SIZE),
            )
            comments.extend(entry.get("body") or "" for entry in payload)
            if len(payload) < _PAGE_SIZE:
                break
            page += 1
        return comments

    # -- patches ---------------------------------------------------------

    def fetch_patch(self, issue: IssueDocument) -> Optional[Patch]:
        """First resolvable patch the thread points at: pull requests
        first, then commit ids, each in document order. A document that
        is itself a pull request carries its own patch, so it goes to
        the front of the line."""
        ordered = [r for r in issue.patch_refs if r.kind == "pull"] + [
            r for r in issue.patch_refs if r.kind == "commit"
        ]
        if issue.is_pull:
            own = PatchRef(
                kind="pull",
                owner=issue.ref.owner,
                repo=issue.ref.repo,
                ref=str(issue.ref.number),
            )
            ordered = [own] + [r for r in ordered if r != own]
        for ref in ordered:
            try:
                patch = self._resolve_patch(ref)
            except NotFoundError:
                log.warning("patch ref %s does not resolve, skipping", ref)
                continue
            if patch.files:
                return patch
        return None

    def _resolve_patch(self, ref: PatchRef) -> Patch:
        if ref.kind == "pull":
            pull = self._call(
                "get_pull", owner=ref.owner, repo=ref.repo, number=ref.ref
            )
            head = pull.get("head") or {}
            sha = head.get("sha", "")
            full_name = (head.get("repo") or {}).get("full_name") or f"{ref.owner}/{ref.repo}"
            head_owner, head_repo = full_name.split("/", 1)
            entries = self._list_pull_files(ref)
            files = [self._modified_file(e, head_owner, head_repo, sha) for e in entries]
            return Patch(ref=ref, files=files)
        commit = self._call("get_commit", owner=ref.owner, repo=ref.repo, sha=ref.ref)
        sha = commit.get("sha") or ref.ref
        files = [
            self._modified_file(e, ref.owner, ref.repo, sha)
            for e in commit.get("files", [])
        ]
        return Patch(ref=ref, files=files)

    def _list_pull_files(self, ref: PatchRef) -> List[dict]:
        entries: List[dict] = []
        page = 1
        while True:
            payload = self._call(
                "get_pull_files",
                owner=ref.owner,
                repo=ref.repo,
                number=ref.ref,
                page=str(page),
                per_page=str(_PAGE_SIZE),
            )
            entries.extend(payload)
            if len(payload) < _PAGE_SIZE:
                break
            page += 1
        return entries

    def _modified_file(self, entry: dict, owner: str, repo: str, sha: str) -> ModifiedFile:
        path = entry.get("filename", "")
        status = entry.get("status", "modified")
        content = None
        # only source files feed the code comparison, so only they are
        # worth a content request
        if path.endswith(".java") and status != "removed" and sha:
            try:
                content = self._file_content(owner, repo, path, sha)
            except NotFoundError:
                log.warning("no content for %s at %s", path, sha[:12])
        return ModifiedFile(
            path=path, status=status, new_content=content, diff=entry.get("patch")
        )

    def _file_content(self, owner: str, repo: str, path: str, ref: str) -> str:
        payload = self._call(
            "get_file_content", owner=owner, repo=repo, path=path, ref=ref
        )
        data = payload.get("content", "")
        if payload.get("encoding") == "base64":
            return base64.b64decode(data).decode("utf-8", errors="replace")
        return data

    # -- repository snapshots ---------------------------------------------

    def fetch_repo_snapshot(
        self,
        owner: str,
        repo: str,
        include_globs: Sequence[str] = DEFAULT_SNAPSHOT_GLOBS,
    ) -> RepoSnapshot:
        """Contents of every file matching the globs at the current head
        of the default branch. Cached on disk per (repo, head, globs)."""
        globs = list(include_globs)
        if not globs:
            raise ValidationError("include_globs must not be empty")
        meta = self._call("get_repo", owner=owner, repo=repo)
        branch = meta.get("default_branch") or "main"
        tree = self._call(
            "get_tree", owner=owner, repo=repo, ref=branch, recursive="1"
        )
        head = tree.get("sha") or branch
        cached = self._cached_snapshot(owner, repo, head, globs)
        if cached is not None:
            return cached

        paths = sorted(
            entry["path"]
            for entry in tree.get("tree", [])
            if entry.get("type") == "blob"
            and any(match_glob(entry["path"], g) for g in globs)
        )
        files: Dict[str, str] = {}
        for path in paths:
            try:
                files[path] = self._file_content(owner, repo, path, head)
            except NotFoundError:
                log.warning("tree lists %s but content fetch failed, skipping", path)
        snapshot = RepoSnapshot(owner=owner, repo=repo, head=head, files=files)
        self._store_snapshot(snapshot, globs)
        return snapshot

    def _snapshot_cache_path(self, owner, repo, head, globs) -> Optional[Path]:
        if self._cache_dir is None:
            return None
        glob_hash = hashlib.sha256(json.dumps(sorted(globs)).encode()).hexdigest()[:16]
        return self._cache_dir / f"{owner}__{repo}__{head}__{glob_hash}.json"

    def _cached_snapshot(self, owner, repo, head, globs) -> Optional[RepoSnapshot]:
        path = self._snapshot_cache_path(owner, repo, head, globs)
        if path is None or not path.is_file():
            return None
        data = json.loads(path.read_text())
        return RepoSnapshot(
            owner=data["owner"], repo=data["repo"], head=data["head"], files=data["files"]
        )

    def _store_snapshot(self, snapshot: RepoSnapshot, globs) -> None:
        path = self._snapshot_cache_path(snapshot.owner, snapshot.repo, snapshot.head, globs)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(
                {
                    "owner": snapshot.owner,
                    "repo": snapshot.repo,
                    "head": snapshot.head,
                    "files": snapshot.files,
                },
                sort_keys=True,
            )
        )


def _item_ref(item: dict) -> IssueRef:
    repo_url = item.get("repository_url", "")
    owner, repo = repo_url.rsplit("/repos/", 1)[1].split("/")[:2]
    return IssueRef(owner, repo, int(item["number"]))
