"""Ranking score, ordering, and the grid-search tuner."""

import dataclasses
import itertools
import random

import pytest

from bugnav import ranking
from bugnav.corpus.models import IssueDocument, IssueRef, PatchRef
from bugnav.errors import ValidationError
from bugnav.evalharness import EvalDataset, EvalEntry, LabeledCandidate
from bugnav.similarity import SimilarityVector
from oracles import dot_reference

DEFAULTS = ranking.WeightConfig()


def _issue(number, body="", comments=(), patch_refs=(), project="octo/demo"):
    owner, repo = project.split("/")
    return IssueDocument(
        ref=IssueRef(owner, repo, number),
        title="t",
        body=body,
        comments=list(comments),
        num_comments=len(comments),
        patch_refs=list(patch_refs),
    )


class TestQualityMetrics:
    def test_empty_issue(self):
        m = ranking.quality_metrics(_issue(1))
        assert (m.word_count, m.has_fix_commit, m.comment_count, m.keyword_count) == (
            0,
            False,
            0,
            0,
        )

    def test_pull_document_counts_as_fixed(self):
        doc = dataclasses.replace(_issue(9, body="This change caps the size."), is_pull=True)
        assert not doc.patch_refs
        assert ranking.quality_metrics(doc).has_fix_commit

    def test_populated_issue(self):
        # 120 whitespace-separated words, two of them descriptive keywords
        body = " ".join(["filler"] * 117 + ["steps", "to", "reproduce"])
        assert len(body.split()) == 120
        issue = _issue(
            2,
            body=body,
            comments=["c1", "c2", "c3", "c4", "c5"],
            patch_refs=[PatchRef("commit", "octo", "demo", "a" * 40)],
        )
        m = ranking.quality_metrics(issue)
        assert m.word_count == 120
        assert m.has_fix_commit is True
        assert m.comment_count == 5
        assert m.keyword_count == 2

    def test_keywords_counted_per_occurrence_in_body_and_comments(self):
        issue = _issue(3, body="error error crash", comments=["another error, fixed"])
        # 2x error + crash in body, 1x error in the comment; "fixed" is not
        # the whole word "fix" and does not count
        assert ranking.quality_metrics(issue).keyword_count == 4

    def test_keywords_case_insensitive_whole_word(self):
        issue = _issue(4, body="Expected vs ACTUAL. Errors everywhere.")
        # "Errors" is plural, not the keyword "error"
        assert ranking.quality_metrics(issue).keyword_count == 2

    def test_title_not_scanned_for_keywords(self):
        issue = _issue(5, body="nothing here")
        issue.title = "crash error exception"
        assert ranking.quality_metrics(issue).keyword_count == 0


class TestNormalizeFactors:
    def test_caps(self):
        m = ranking.QualityMetrics(
            word_count=1000, has_fix_commit=True, comment_count=40, keyword_count=9
        )
        f = ranking.normalize_factors(m, SimilarityVector())
        assert f.issue_length == 1.0
        assert f.num_comment == 1.0
        assert f.has_fix == 1.0
        assert f.keywords == 1.0

    def test_linear_below_cap(self):
        m = ranking.QualityMetrics(
            word_count=250, has_fix_commit=False, comment_count=5, keyword_count=1
        )
        f = ranking.normalize_factors(m, SimilarityVector())
        assert f.issue_length == 0.5
        assert f.num_comment == 0.25
        assert f.has_fix == 0.0
        assert f.keywords == 0.2

    def test_zero_inputs_zero_vector(self):
        m = ranking.QualityMetrics(0, False, 0, 0)
        f = ranking.normalize_factors(m, SimilarityVector())
        assert f.as_tuple() == (0.0,) * 8

    def test_similarities_pass_through(self):
        sims = SimilarityVector(
            code=0.594, dependency=1.0, permission=0.25, ui=0.5,
            applicable=frozenset({"code", "dependency", "permission", "ui"}),
        )
        f = ranking.normalize_factors(ranking.QualityMetrics(0, False, 0, 0), sims)
        assert (f.code, f.dep, f.perm, f.ui) == (0.594, 1.0, 0.25, 0.5)


class TestScore:
    def test_zero_vector(self):
        assert ranking.score(ranking.FactorVector(), DEFAULTS) == 0.0

    def test_code_weight_alone(self):
        f = ranking.FactorVector(code=1.0)
        assert ranking.score(f, DEFAULTS) == 0.1428

    def test_two_factor_example(self):
        f = ranking.FactorVector(issue_length=0.5, dep=1.0)
        assert ranking.score(f, DEFAULTS) == pytest.approx(0.2499, abs=1e-12)

    def test_matches_dot_oracle_on_random_vectors(self):
        rng = random.Random(21)
        for _ in range(1000):
            f = ranking.FactorVector(*(rng.random() for _ in range(8)))
            w = ranking.WeightConfig(*(rng.random() for _ in range(8)))
            want = dot_reference(f.as_tuple(), w.as_tuple())
            assert ranking.score(f, w) == pytest.approx(want, abs=1e-12)

    def test_linear_in_factors(self):
        rng = random.Random(22)
        for _ in range(200):
            vals = [rng.random() for _ in range(8)]
            alpha = rng.random() * 3
            f = ranking.FactorVector(*vals)
            scaled = ranking.FactorVector(*(alpha * v for v in vals))
            assert ranking.score(scaled, DEFAULTS) == pytest.approx(
                alpha * ranking.score(f, DEFAULTS), abs=1e-9
            )

    def test_default_weights_sum(self):
        assert sum(DEFAULTS.as_tuple()) == pytest.approx(0.9996, abs=1e-12)


def _rank_input(number, search_rank, *, word_count=0, comments=0, sims=None, fix=False):
    issue = _issue(number, body=" ".join(["w"] * word_count))
    issue.num_comments = comments
    metrics = ranking.QualityMetrics(
        word_count=word_count,
        has_fix_commit=fix,
        comment_count=comments,
        keyword_count=0,
    )
    return ranking.RankInput(
        issue=issue,
        metrics=metrics,
        sims=sims or SimilarityVector(),
        search_rank=search_rank,
    )


class TestRank:
    def test_orders_by_score_descending(self):
        a = _rank_input(1, 1, word_count=50)
        b = _rank_input(2, 2, sims=SimilarityVector(dependency=1.0, applicable=frozenset({"dependency"})))
        out = ranking.rank([a, b], DEFAULTS)
        assert [c.issue.ref.number for c in out] == [2, 1]
        assert [c.final_rank for c in out] == [1, 2]
        assert out[0].score > out[1].score

    def test_tie_broken_by_search_rank(self):
        a = _rank_input(1, 4)
        b = _rank_input(2, 2)
        out = ranking.rank([a, b], DEFAULTS)
        assert [c.search_rank for c in out] == [2, 4]

    def test_empty_input(self):
        assert ranking.rank([], DEFAULTS) == []

    def test_duplicate_search_ranks_rejected(self):
        with pytest.raises(ValidationError):
            ranking.rank([_rank_input(1, 3), _rank_input(2, 3)], DEFAULTS)

    def test_zero_similarity_equal_quality_reproduces_platform_order(self):
        inputs = [_rank_input(i, sr, word_count=100) for i, sr in enumerate([3, 1, 5, 2, 4])]
        out = ranking.rank(inputs, DEFAULTS)
        assert [c.search_rank for c in out] == [1, 2, 3, 4, 5]

    def test_final_rank_is_permutation(self):
        rng = random.Random(31)
        for _ in range(200):
            n = rng.randint(1, 12)
            ranks = rng.sample(range(1, 40), n)
            inputs = [
                _rank_input(
                    i,
                    ranks[i],
                    word_count=rng.randint(0, 700),
                    comments=rng.randint(0, 30),
                    sims=SimilarityVector(
                        code=rng.random(), dependency=rng.random(),
                        permission=rng.random(), ui=rng.random(),
                    ),
                    fix=rng.random() < 0.5,
                )
                for i in range(n)
            ]
            out = ranking.rank(inputs, DEFAULTS)
            assert sorted(c.final_rank for c in out) == list(range(1, n + 1))
            scores = [c.score for c in out]
            assert scores == sorted(scores, reverse=True)

    def test_scaling_all_weights_keeps_order(self):
        rng = random.Random(32)
        for _ in range(100):
            n = rng.randint(2, 8)
            ranks = rng.sample(range(1, 30), n)
            inputs = [
                _rank_input(
                    i, ranks[i],
                    word_count=rng.randint(0, 600),
                    comments=rng.randint(0, 25),
                    sims=SimilarityVector(code=rng.random(), dependency=rng.random()),
                )
                for i in range(n)
            ]
            base = ranking.rank(inputs, DEFAULTS)
            scaled_w = ranking.WeightConfig(*(3.0 * w for w in DEFAULTS.as_tuple()))
            scaled = ranking.rank(inputs, scaled_w)
            assert [c.issue.ref for c in base] == [c.issue.ref for c in scaled]


def _tuner_dataset():
    """One query where the relevant candidate only wins with the whole
    swept budget on the dependency weight.

    The irrelevant candidate leads the raw order with dep 0.9 plus a
    quality edge of 0.0714 + 0.02*0.1428 = 0.074256, so the relevant
    one (dep 1.0, nothing else) overtakes iff 0.1*w_dep > 0.074256,
    i.e. w_dep > 0.74256: only the grid point w_dep = 11*0.0714 =
    0.7854 qualifies, and with margin 0.0043 on one side and 0.0029 on
    the other there is no float-tie risk.
    """
    driver = IssueRef("octo", "driver", 1)
    irrelevant = LabeledCandidate(
        ref=IssueRef("octo", "noise", 2),
        factors=ranking.FactorVector(issue_length=1.0, num_comment=0.02, dep=0.9),
    )
    relevant = LabeledCandidate(
        ref=IssueRef("octo", "signal", 3),
        factors=ranking.FactorVector(dep=1.0),
    )
    entry = EvalEntry(
        driver=driver,
        candidates=[irrelevant, relevant],
        relevant=frozenset({relevant.ref}),
    )
    return EvalDataset(entries=[entry])


def _grid_tuples(step):
    """Brute-force oracle: every admissible swept tuple, in lexicographic
    order."""
    fixed = DEFAULTS.w_issue_length + DEFAULTS.w_num_comment
    out = []
    top = int(round(1.0 / step)) + 1
    for ks in itertools.product(range(top), repeat=4):
        swept = tuple(k * step for k in ks)
        if abs(fixed + sum(swept) - 1.0) <= 4e-4 + 1e-9:
            out.append(swept)
    return sorted(out)


class TestTuneWeights:
    def test_grid_size_at_published_step(self):
        assert len(_grid_tuples(0.0714)) == 364

    def test_defaults_are_on_the_grid(self):
        swept = (DEFAULTS.w_code, DEFAULTS.w_dep, DEFAULTS.w_perm, DEFAULTS.w_ui)
        assert swept in _grid_tuples(0.0714)

    def test_assigns_budget_to_dependency_weight(self):
        tuned = ranking.tune_weights(_tuner_dataset(), grid_step=0.0714)
        assert tuned.w_dep == pytest.approx(11 * 0.0714)
        assert (tuned.w_code, tuned.w_perm, tuned.w_ui) == (0.0, 0.0, 0.0)
        assert tuned.w_issue_length == DEFAULTS.w_issue_length
        assert tuned.w_num_comment == DEFAULTS.w_num_comment

    def test_matches_brute_force_oracle(self):
        from bugnav.evalharness import evaluate

        dataset = _tuner_dataset()
        best = None
        for swept in _grid_tuples(0.0714):
            w = dataclasses.replace(
                DEFAULTS, w_code=swept[0], w_dep=swept[1], w_perm=swept[2], w_ui=swept[3]
            )
            mrr = evaluate(dataset, w).per_system["reranked"].mrr
            if best is None or mrr > best[0] or (mrr == best[0] and swept < best[1]):
                best = (mrr, swept)
        tuned = ranking.tune_weights(dataset, grid_step=0.0714)
        assert (tuned.w_code, tuned.w_dep, tuned.w_perm, tuned.w_ui) == best[1]

    def test_all_irrelevant_returns_lexicographically_smallest(self):
        dataset = _tuner_dataset()
        entry = dataset.entries[0]
        stripped = EvalEntry(
            driver=entry.driver, candidates=entry.candidates, relevant=frozenset()
        )
        tuned = ranking.tune_weights(EvalDataset(entries=[stripped]), grid_step=0.0714)
        assert (tuned.w_code, tuned.w_dep, tuned.w_perm, tuned.w_ui) == _grid_tuples(0.0714)[0]

    def test_degenerate_grid_returns_defaults(self):
        # grid_step 1.0 admits no tuple summing with the fixed weights to
        # ~1, so the defaults are the single evaluated combination
        tuned = ranking.tune_weights(_tuner_dataset(), grid_step=1.0)
        assert tuned == DEFAULTS

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValidationError):
            ranking.tune_weights(EvalDataset(entries=[]), grid_step=0.5)

    def test_improves_over_defaults_on_tuner_dataset(self):
        from bugnav.evalharness import evaluate

        dataset = _tuner_dataset()
        tuned = ranking.tune_weights(dataset, grid_step=0.0714)
        before = evaluate(dataset, DEFAULTS).per_system["reranked"].mrr
        after = evaluate(dataset, tuned).per_system["reranked"].mrr
        assert after > before
        assert before == 0.5 and after == 1.0
