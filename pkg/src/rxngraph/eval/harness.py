"""Time-split forward prediction, baselines and the derived protocols."""

from __future__ import annotations

import logging
import random
import statistics
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from ..chem.molecule import Molecule
from ..chem.reaction import ReactionRecord
from ..errors import UnknownMolecule
from ..kgraph import KnowledgeGraph, build_graph
from ..reasoner import SearchParams, find_paths
from ..transform import predict_products, principal_product
from .templates import ReactionTemplate, apply_templates

log = logging.getLogger(__name__)


# -- leakage instrumentation -------------------------------------------------

class AccessLog:
    """Records which record ids are read during which phase."""

    def __init__(self):
        self.phase = "idle"
        self.events: list[tuple[str, str, str]] = []

    @contextmanager
    def during(self, phase: str):
        previous, self.phase = self.phase, phase
        try:
            yield self
        finally:
            self.phase = previous

    def wrap(self, records: Sequence[ReactionRecord], label: str) -> "TrackedRecords":
        return TrackedRecords(list(records), label, self)

    def reads(self, phase: str, label: str) -> list[str]:
        return [rid for p, lab, rid in self.events if p == phase and lab == label]


class TrackedRecords(Sequence[ReactionRecord]):
    """Read-only record sequence that reports every element access."""

    def __init__(self, records: list[ReactionRecord], label: str, log_: AccessLog):
        self._records = records
        self.label = label
        self._log = log_

    def _note(self, rec: ReactionRecord) -> ReactionRecord:
        self._log.events.append((self._log.phase, self.label, rec.id))
        return rec

    def __len__(self) -> int:
        return len(self._records)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._note(r) for r in self._records[i]]
        return self._note(self._records[i])

    def __iter__(self) -> Iterator[ReactionRecord]:
        for rec in self._records:
            yield self._note(rec)


# -- splits -----------------------------------------------------------------

def time_split(records: Iterable[ReactionRecord], cutoff_year: int) -> tuple[list[ReactionRecord], list[ReactionRecord]]:
    """``train`` holds records before the cutoff year, ``test`` the rest."""
    train, test = [], []
    for rec in records:
        (train if rec.year < cutoff_year else test).append(rec)
    return train, test


def yearly_splits(records: Sequence[ReactionRecord], years: Iterable[int]):
    """For each year n: (n, records published before n, records published in n)."""
    out = []
    for year in years:
        train = [r for r in records if r.year < year]
        test = [r for r in records if r.year == year]
        out.append((year, train, test))
    return out


# -- reports ----------------------------------------------------------------

@dataclass
class Outcome:
    id: str
    expected: str
    predicted: tuple[str, ...]
    correct: bool
    flags: tuple[str, ...] = ()


@dataclass
class EvalReport:
    name: str
    outcomes: list[Outcome] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.outcomes)

    @property
    def correct(self) -> int:
        return sum(o.correct for o in self.outcomes)

    @property
    def empty(self) -> bool:
        return not self.outcomes

    @property
    def accuracy(self) -> float:
        """Fraction correct; an empty evaluation reports 0 (see ``empty``)."""
        return self.correct / self.total if self.outcomes else 0.0

    @property
    def median_predicted(self) -> float:
        counts = [len(o.predicted) for o in self.outcomes]
        return float(statistics.median(counts)) if counts else 0.0

    @property
    def mean_predicted(self) -> float:
        counts = [len(o.predicted) for o in self.outcomes]
        return float(statistics.fmean(counts)) if counts else 0.0

    def summary(self) -> dict[str, str]:
        out = {
            "total": str(self.total),
            "correct": str(self.correct),
            "accuracy": f"{self.accuracy:.6f}",
            "median_predicted": f"{self.median_predicted:.3f}",
            "mean_predicted": f"{self.mean_predicted:.3f}",
        }
        if self.empty:
            out["warning"] = "empty evaluation set"
        return out


def expected_key(record: ReactionRecord) -> str:
    return principal_product(record.products).canonical_key


def _record_flags(record: ReactionRecord) -> list[str]:
    flags = []
    if len(record.products) > 1:
        flags.append("multi_product")
    if not record.is_binary:
        flags.append("not_binary")
    return flags


def path_model_predictions(g: KnowledgeGraph, reactants: Sequence[Molecule], params: SearchParams) -> tuple[list[str], list[str]]:
    """(predicted product keys, flags) for a reactant pair."""
    if len(reactants) != 2:
        return [], ["not_binary"]
    try:
        a, b = (g.molecule_id(m) for m in reactants)
    except UnknownMolecule:
        return [], ["unknown_reactant"]
    if a == b:
        return [], ["same_molecule"]
    paths = find_paths(g, a, b, params)
    return [p.key for p in predict_products(g, a, b, paths)], []


def evaluate_forward(g_train: KnowledgeGraph, test: Iterable[ReactionRecord], params: SearchParams = SearchParams(),
                     name: str = "path_model") -> EvalReport:
    """Correct iff the recorded principal product is among the predictions."""
    report = EvalReport(name)
    for rec in test:
        expected = expected_key(rec)
        predicted, flags = path_model_predictions(g_train, rec.reactants, params)
        report.outcomes.append(Outcome(
            rec.id, expected, tuple(predicted), expected in predicted,
            tuple(_record_flags(rec) + [f for f in flags if f != "not_binary"]),
        ))
    return report


def evaluate_rules(templates: Sequence[ReactionTemplate], test: Iterable[ReactionRecord]) -> EvalReport:
    """Rule-based baseline: products of all matching templates."""
    report = EvalReport("rule_baseline")
    for rec in test:
        expected = expected_key(rec)
        predicted = [m.canonical_key for m in apply_templates(templates, rec.reactants)]
        report.outcomes.append(Outcome(rec.id, expected, tuple(predicted), expected in predicted,
                                       tuple(_record_flags(rec))))
    return report


def random_baseline(test: Sequence[ReactionRecord], seed: int = 0) -> EvalReport:
    """Draw one product uniformly from the multiset of all test products."""
    rng = random.Random(seed)
    pool = [expected_key(r) for r in test]
    report = EvalReport("random_baseline")
    for rec, expected in zip(test, pool):
        pick = rng.choice(pool)
        report.outcomes.append(Outcome(rec.id, expected, (pick,), pick == expected))
    return report


def novel_type_split(test: Iterable[ReactionRecord], templates: Sequence[ReactionTemplate]) -> list[ReactionRecord]:
    """Test records whose product no template reproduces from their reactants."""
    out = []
    for rec in test:
        produced = {m.canonical_key for m in apply_templates(templates, rec.reactants)}
        if expected_key(rec) not in produced:
            out.append(rec)
    return out


@dataclass
class NegativeRow:
    id: str
    wrong: tuple[str, ...]
    rejected: tuple[str, ...]


@dataclass
class NegativeReport:
    rows: list[NegativeRow] = field(default_factory=list)

    @property
    def wrong(self) -> int:
        return sum(len(r.wrong) for r in self.rows)

    @property
    def rejected(self) -> int:
        return sum(len(r.rejected) for r in self.rows)

    @property
    def rejection_rate(self) -> float:
        return self.rejected / self.wrong if self.wrong else 0.0


def negative_validation(g_train: KnowledgeGraph, test: Iterable[ReactionRecord],
                        templates: Sequence[ReactionTemplate],
                        params: SearchParams = SearchParams()) -> NegativeReport:
    """Template products other than the recorded one are "wrong"; count how many
    the path model does not predict."""
    report = NegativeReport()
    for rec in test:
        expected = expected_key(rec)
        wrong = sorted({m.canonical_key for m in apply_templates(templates, rec.reactants)} - {expected})
        if not wrong:
            continue
        predicted = set(path_model_predictions(g_train, rec.reactants, params)[0])
        rejected = [w for w in wrong if w not in predicted]
        report.rows.append(NegativeRow(rec.id, tuple(wrong), tuple(rejected)))
    return report


def scaling_study(train: Sequence[ReactionRecord], fractions: Sequence[float], test: Sequence[ReactionRecord],
                  seed: int = 0, params: SearchParams = SearchParams(),
                  build: Callable[[Iterable[ReactionRecord]], KnowledgeGraph] = build_graph):
    """(fraction, edge count, accuracy) over nested random subsets of ``train``."""
    order = list(range(len(train)))
    random.Random(seed).shuffle(order)
    series = []
    for frac in fractions:
        if not 0.0 <= frac <= 1.0:
            raise ValueError(f"fraction {frac} outside [0, 1]")
        n = round(frac * len(train))
        subset = [train[i] for i in sorted(order[:n])]
        g = build(subset)
        report = evaluate_forward(g, test, params)
        series.append((frac, len(g.edges), report.accuracy))
    return series


__all__ = [
    "AccessLog", "EvalReport", "NegativeReport", "NegativeRow", "Outcome", "TrackedRecords",
    "evaluate_forward", "evaluate_rules", "expected_key", "negative_validation", "novel_type_split",
    "path_model_predictions", "random_baseline", "scaling_study", "time_split", "yearly_splits",
]
