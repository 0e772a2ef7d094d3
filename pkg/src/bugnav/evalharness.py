"""Offline evaluation: Prec@k and MRR over labeled candidate lists.

A dataset snapshot carries, per driver issue, the raw platform-ordered
candidates with their factor vectors and the relevance labels, which
is everything needed to score a weight configuration without network
access.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import AbstractSet, Dict, List, Sequence, Tuple

from .corpus.models import IssueRef
from .errors import ValidationError
from .ranking import FactorVector, WeightConfig, score

PRECISION_CUTOFFS = (1, 3, 5)


@dataclass(frozen=True)
class LabeledCandidate:
    ref: IssueRef
    factors: FactorVector


@dataclass(frozen=True)
class EvalEntry:
    driver: IssueRef
    candidates: List[LabeledCandidate]
    relevant: frozenset

    def __post_init__(self):
        refs = {c.ref for c in self.candidates}
        stray = set(self.relevant) - refs
        if stray:
            raise ValidationError(
                f"relevance labels outside the candidate list: {sorted(map(str, stray))}"
            )


@dataclass(frozen=True)
class SystemMetrics:
    prec_at: Dict[int, float]
    mrr: float


@dataclass(frozen=True)
class EvalReport:
    per_system: Dict[str, SystemMetrics]
    num_relevant: int

    @property
    def prec_at(self) -> Dict[int, float]:
        return self.per_system["reranked"].prec_at

    @property
    def mrr(self) -> float:
        return self.per_system["reranked"].mrr

    def to_dict(self) -> dict:
        return {
            "num_relevant": self.num_relevant,
            "per_system": {
                name: {
                    "prec_at": {str(k): v for k, v in metrics.prec_at.items()},
                    "mrr": metrics.mrr,
                }
                for name, metrics in self.per_system.items()
            },
        }

    def format_table(self) -> str:
        header = f"{'system':<12}" + "".join(f"{f'Prec@{k}':>9}" for k in PRECISION_CUTOFFS)
        header += f"{'MRR':>9}"
        lines = [header]
        for name, metrics in self.per_system.items():
            row = f"{name:<12}"
            row += "".join(f"{metrics.prec_at[k]:>9.3f}" for k in PRECISION_CUTOFFS)
            row += f"{metrics.mrr:>9.3f}"
            lines.append(row)
        return "\n".join(lines)


@dataclass
class EvalDataset:
    entries: List[EvalEntry] = field(default_factory=list)

    def save(self, path) -> None:
        lines = []
        for entry in self.entries:
            record = {
                "driver": str(entry.driver),
                "candidates": [
                    {"ref": str(c.ref), "factors": c.factors.to_dict()}
                    for c in entry.candidates
                ],
                "relevant": sorted(str(r) for r in entry.relevant),
            }
            lines.append(json.dumps(record, sort_keys=True))
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))

    @classmethod
    def load(cls, path) -> "EvalDataset":
        entries = []
        for line in Path(path).read_text().splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            entries.append(
                EvalEntry(
                    driver=IssueRef.parse(record["driver"]),
                    candidates=[
                        LabeledCandidate(
                            ref=IssueRef.parse(c["ref"]),
                            factors=FactorVector.from_dict(c.get("factors", {})),
                        )
                        for c in record["candidates"]
                    ],
                    relevant=frozenset(IssueRef.parse(r) for r in record["relevant"]),
                )
            )
        return cls(entries=entries)


def precision_at_k(ranked: Sequence[IssueRef], relevant: AbstractSet, k: int) -> float:
    """Fraction of the top k that is relevant. An empty result list
    counts as precision 1; a short but non-empty list still divides
    by k."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    if not ranked:
        return 1.0
    hits = sum(1 for ref in ranked[:k] if ref in relevant)
    return hits / k


def mean_reciprocal_rank(
    entries: Sequence[Tuple[Sequence[IssueRef], AbstractSet]],
) -> float:
    """Mean of 1/position of the first relevant item per query; a query
    with no relevant item contributes 0."""
    if not entries:
        raise ValidationError("MRR needs at least one query")
    total = 0.0
    for ranked, relevant in entries:
        for position, ref in enumerate(ranked, start=1):
            if ref in relevant:
                total += 1.0 / position
                break
    return total / len(entries)


def rerank_entry(entry: EvalEntry, weights: WeightConfig) -> List[IssueRef]:
    """Candidate refs reordered by score, ties keeping raw order."""
    order = sorted(
        range(len(entry.candidates)),
        key=lambda i: (-score(entry.candidates[i].factors, weights), i),
    )
    return [entry.candidates[i].ref for i in order]


def _system_metrics(lists: List[List[IssueRef]], dataset: EvalDataset) -> SystemMetrics:
    pairs = [(ranked, entry.relevant) for ranked, entry in zip(lists, dataset.entries)]
    prec = {
        k: sum(precision_at_k(ranked, relevant, k) for ranked, relevant in pairs)
        / len(pairs)
        for k in PRECISION_CUTOFFS
    }
    return SystemMetrics(prec_at=prec, mrr=mean_reciprocal_rank(pairs))


def evaluate(dataset: EvalDataset, weights: WeightConfig) -> EvalReport:
    """Score the raw platform ordering and the re-ranked ordering side
    by side. Pure function of its arguments."""
    if not dataset.entries:
        raise ValidationError("evaluation needs a non-empty dataset")
    raw = [[c.ref for c in entry.candidates] for entry in dataset.entries]
    reranked = [rerank_entry(entry, weights) for entry in dataset.entries]
    return EvalReport(
        per_system={
            "raw_search": _system_metrics(raw, dataset),
            "reranked": _system_metrics(reranked, dataset),
        },
        num_relevant=sum(len(entry.relevant) for entry in dataset.entries),
    )
