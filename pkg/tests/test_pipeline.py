import json
import logging

import pytest

from bugnav import pipeline
from bugnav.config import RunConfig
from bugnav.corpus import (
    IssueDocument,
    IssueHit,
    IssueRef,
    LiveTransport,
    ModifiedFile,
    Patch,
    PatchRef,
    PlatformClient,
    ReplayTransport,
    RepoSnapshot,
)
from bugnav.errors import NoCandidatesError, NotFoundError, ValidationError
from bugnav.ranking import WeightConfig

DRIVER_BODY = """\
Serialization fails once the values pass a certain size:

java.io.UTFDataFormatException: encoded string too long: 93067 bytes
    at java.io.DataOutputStream.writeUTF(DataOutputStream.java:364)
    at com.typesafe.config.impl.SerializedConfigValue.writeValueData(SerializedConfigValue.java:301)
"""

MAIN_JAVA = """\
public class Main {
    public int size(byte[] data) {
        if (data == null) {
            return 0;
        }
        return data.length;
    }
}
"""

POM = """\
<project>
  <dependencies>
    <dependency>
      <groupId>com.typesafe</groupId>
      <artifactId>config</artifactId>
      <version>1.3.0</version>
    </dependency>
  </dependencies>
</project>
"""

FIX_BODY = (
    "Steps to reproduce the error are below. The exception only shows up "
    "with large payloads and the fix keeps the actual size in bounds."
)


def _ref(owner, repo, number):
    return IssueRef(owner=owner, repo=repo, number=number)


def _doc(ref, title="t", body="", comments=(), state="closed", patch_refs=()):
    return IssueDocument(
        ref=ref,
        title=title,
        body=body,
        comments=list(comments),
        state=state,
        labels=[],
        num_comments=len(comments),
        is_pull=False,
        patch_refs=list(patch_refs),
    )


class FakeClient:
    """In-memory stand-in for PlatformClient, keyed by issue ref."""

    def __init__(self):
        self.search_results = []
        self.search_queries = []
        self.search_kwargs = []
        self.issues = {}
        self.patches = {}
        self.snapshots = {}

    def search_issues(self, query, *, language=None, state="closed", max_results=100):
        self.search_queries.append(query)
        self.search_kwargs.append((language, state, max_results))
        return self.search_results[:max_results]

    def fetch_issue(self, ref):
        if ref not in self.issues:
            raise NotFoundError(f"no such issue {ref}")
        return self.issues[ref]

    def fetch_patch(self, issue):
        return self.patches.get(issue.ref)

    def fetch_repo_snapshot(self, owner, repo, include_globs=None):
        key = f"{owner}/{repo}"
        if key not in self.snapshots:
            raise NotFoundError(f"no snapshot for {key}")
        return self.snapshots[key]


def _hit(ref, rank, title="t"):
    return IssueHit(ref=ref, title=title, search_rank=rank, is_pull=False)


def _scenario():
    """Driver plus three candidates; the patched one should win."""
    client = FakeClient()
    driver_ref = _ref("octo", "driver", 7)
    driver = _doc(driver_ref, title="UTFDataFormatException on large objects", body=DRIVER_BODY, state="open")
    client.issues[driver_ref] = driver
    client.snapshots["octo/driver"] = RepoSnapshot(
        "octo", "driver", "a" * 40, {"src/Main.java": MAIN_JAVA, "pom.xml": POM}
    )

    alpha = _ref("acme", "alpha", 11)
    beta = _ref("acme", "beta", 22)
    delta = _ref("acme", "delta", 44)
    client.issues[alpha] = _doc(alpha, title="alpha bug", body="identical filler words here")
    client.issues[beta] = _doc(beta, title="beta bug", body="identical filler words here")
    client.issues[delta] = _doc(
        delta,
        title="delta bug",
        body=FIX_BODY,
        comments=["Fixed by the linked pull request."],
        patch_refs=[PatchRef(kind="pull", owner="acme", repo="delta", ref="9")],
    )
    client.snapshots["acme/alpha"] = RepoSnapshot("acme", "alpha", "b" * 40, {})
    client.snapshots["acme/beta"] = RepoSnapshot("acme", "beta", "b" * 40, {})
    client.snapshots["acme/delta"] = RepoSnapshot("acme", "delta", "b" * 40, {"pom.xml": POM})
    client.patches[delta] = Patch(
        ref=PatchRef(kind="pull", owner="acme", repo="delta", ref="9"),
        files=[ModifiedFile(path="src/Fix.java", new_content=MAIN_JAVA, diff="@@")],
    )
    client.search_results = [_hit(alpha, 1), _hit(beta, 2), _hit(delta, 3)]
    return client, driver


CFG = RunConfig(n_threshold=2)


class TestRecommend:
    def test_patched_lookalike_wins(self):
        client, driver = _scenario()
        rec = pipeline.recommend(driver, CFG, client)
        refs = [str(c.issue.ref) for c in rec.candidates]
        assert refs == ["acme/delta#44", "acme/alpha#11", "acme/beta#22"]
        assert [c.final_rank for c in rec.candidates] == [1, 2, 3]
        top = rec.candidates[0]
        assert top.sims.code == 1.0
        assert top.sims.dependency == 1.0
        assert top.search_rank == 3

    def test_search_wiring_uses_config(self):
        client, driver = _scenario()
        cfg = RunConfig(n_threshold=2, max_candidates=50)
        rec = pipeline.recommend(driver, cfg, client)
        assert client.search_kwargs == [("java", "closed", 50)]
        assert rec.outcome.query.strategy == "stack_trace"
        assert len(rec.outcome.attempts) == 1
        assert rec.weights == cfg.weights

    def test_driver_never_recommends_itself(self):
        client, driver = _scenario()
        client.search_results = [_hit(driver.ref, 1)] + client.search_results
        rec = pipeline.recommend(driver, CFG, client)
        refs = {str(c.issue.ref) for c in rec.candidates}
        assert "octo/driver#7" not in refs
        assert len(rec.candidates) == 3

    def test_no_hits_raises_with_strategies(self):
        client, driver = _scenario()
        client.search_results = []
        with pytest.raises(NoCandidatesError) as exc:
            pipeline.recommend(driver, CFG, client)
        assert "stack_trace" in str(exc.value)

    def test_driver_only_hits_count_as_none(self):
        client, driver = _scenario()
        client.search_results = [_hit(driver.ref, 1), _hit(driver.ref, 2)]
        with pytest.raises(NoCandidatesError):
            pipeline.recommend(driver, CFG, client)

    def test_missing_snapshots_degrade_to_empty_context(self, caplog):
        client, driver = _scenario()
        client.snapshots.clear()
        with caplog.at_level(logging.WARNING, logger="bugnav.pipeline"):
            rec = pipeline.recommend(driver, CFG, client)
        assert len(rec.candidates) == 3
        assert all(not c.sims.applicable for c in rec.candidates)
        assert any("snapshot" in r.getMessage() for r in caplog.records)

    def test_unfetchable_candidate_is_dropped(self, caplog):
        client, driver = _scenario()
        del client.issues[_ref("acme", "alpha", 11)]
        with caplog.at_level(logging.WARNING, logger="bugnav.pipeline"):
            rec = pipeline.recommend(driver, CFG, client)
        refs = {str(c.issue.ref) for c in rec.candidates}
        assert refs == {"acme/beta#22", "acme/delta#44"}
        assert any("acme/alpha#11" in r.getMessage() for r in caplog.records)

    def test_zero_weights_reproduce_platform_order(self):
        client, driver = _scenario()
        zero = WeightConfig(**{f: 0.0 for f in WeightConfig().to_dict()})
        cfg = RunConfig(n_threshold=2, weights=zero)
        rec = pipeline.recommend(driver, cfg, client)
        refs = [str(c.issue.ref) for c in rec.candidates]
        assert refs == ["acme/alpha#11", "acme/beta#22", "acme/delta#44"]

    def test_parallelism_does_not_change_output(self):
        outs = []
        for workers in (1, 4):
            client, driver = _scenario()
            cfg = RunConfig(n_threshold=2, parallelism=workers)
            rec = pipeline.recommend(driver, cfg, client)
            outs.append(pipeline.recommendation_to_dict(rec))
        assert outs[0] == outs[1]


class TestRecommendationDict:
    def test_shape_and_determinism(self):
        client, driver = _scenario()
        rec = pipeline.recommend(driver, CFG, client)
        data = pipeline.recommendation_to_dict(rec)
        assert set(data) == {"driver", "query", "attempts", "weights", "candidates"}
        assert data["driver"] == "octo/driver#7"
        assert data["query"]["strategy"] == "stack_trace"
        assert data["query"]["text"] == "UTFDataFormatException encoded string too long"
        assert data["query"]["qualifiers"] == ["in:body,comments"]
        assert data["attempts"] == [
            {
                "strategy": "stack_trace",
                "query": "UTFDataFormatException encoded string too long in:body,comments",
                "hits": 3,
            }
        ]
        assert data["weights"] == CFG.weights.to_dict()
        top = data["candidates"][0]
        assert set(top) == {
            "final_rank",
            "search_rank",
            "ref",
            "title",
            "score",
            "factors",
            "similarities",
            "metrics",
        }
        assert top["similarities"]["applicable"] == ["code", "dependency"]
        assert top["metrics"]["has_fix_commit"] is True

        client2, driver2 = _scenario()
        again = pipeline.recommendation_to_dict(pipeline.recommend(driver2, CFG, client2))
        assert json.dumps(data, indent=2, sort_keys=True) == json.dumps(
            again, indent=2, sort_keys=True
        )


class TestResolveDriver:
    def test_reference_fetches_from_client(self):
        client, driver = _scenario()
        assert pipeline.resolve_driver("octo/driver#7", client) is driver

    def test_file_path_loads_local_issue(self, tmp_path):
        path = tmp_path / "issue.json"
        path.write_text(
            json.dumps(
                {
                    "ref": "octo/driver#7",
                    "title": "UTFDataFormatException on large objects",
                    "body": DRIVER_BODY,
                    "comments": ["see also https://github.com/octo/driver/pull/9"],
                }
            )
        )
        doc = pipeline.resolve_driver(str(path), FakeClient())
        assert str(doc.ref) == "octo/driver#7"
        assert doc.state == "open"
        assert doc.num_comments == 1
        assert PatchRef(kind="pull", owner="octo", repo="driver", ref="9") in doc.patch_refs

    def test_unresolvable_source(self, tmp_path):
        with pytest.raises(ValidationError):
            pipeline.resolve_driver(str(tmp_path / "missing.json"), FakeClient())
        with pytest.raises(ValidationError):
            pipeline.resolve_driver("definitely not a ref", FakeClient())


class TestLoadIssueFile:
    def test_minimal_fields(self, tmp_path):
        path = tmp_path / "issue.json"
        path.write_text(json.dumps({"ref": "o/r#1", "title": "t"}))
        doc = pipeline.load_issue_file(str(path))
        assert doc.body == ""
        assert doc.comments == []
        assert doc.state == "open"
        assert not doc.is_pull

    @pytest.mark.parametrize(
        "payload",
        [
            "{broken",
            json.dumps({"title": "no ref"}),
            json.dumps({"ref": "o/r#1", "title": "t", "bogus_key": 1}),
            json.dumps({"ref": "not-a-ref", "title": "t"}),
            json.dumps(["not", "an", "object"]),
        ],
    )
    def test_bad_files_rejected(self, tmp_path, payload):
        path = tmp_path / "issue.json"
        path.write_text(payload)
        with pytest.raises(ValidationError):
            pipeline.load_issue_file(str(path))


class TestBuildClient:
    def test_replay_client(self, tmp_path):
        client = pipeline.build_client(RunConfig(fixture_dir=str(tmp_path)))
        assert isinstance(client, PlatformClient)
        assert isinstance(client._transport, ReplayTransport)

    def test_missing_fixture_dir_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            pipeline.build_client(RunConfig(fixture_dir=str(tmp_path / "nope")))

    def test_live_client_reads_token_env(self, monkeypatch):
        monkeypatch.setenv("MY_TOKEN", "tok123")
        client = pipeline.build_client(RunConfig(auth_token_source="MY_TOKEN"))
        assert isinstance(client._transport, LiveTransport)
