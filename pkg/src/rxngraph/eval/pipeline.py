"""End-to-end validation run producing a deterministic TSV report."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..chem.reaction import ReactionRecord
from ..kgraph import build_graph
from ..reasoner import SearchParams
from .harness import (
    AccessLog,
    EvalReport,
    evaluate_forward,
    evaluate_rules,
    negative_validation,
    novel_type_split,
    random_baseline,
    scaling_study,
    time_split,
)
from .templates import extract_templates


class LeakageError(AssertionError):
    """A test record was read while the training graph was being built."""


@dataclass(frozen=True)
class ValidationConfig:
    cutoff: int = 2014
    novel_only: bool = False
    negative: bool = False
    scaling: tuple[float, ...] = ()
    seed: int = 0
    template_radius: int = 1
    params: SearchParams = field(default_factory=SearchParams)


@dataclass
class ValidationResult:
    forward: EvalReport
    rules: EvalReport
    random: EvalReport
    novel: EvalReport | None = None
    novel_rules: EvalReport | None = None
    negative: object | None = None
    scaling: list | None = None
    access: AccessLog | None = None
    n_train: int = 0
    n_test: int = 0
    n_templates: int = 0
    text: str = ""


def _outcome_lines(report: EvalReport, years: dict[str, int]) -> list[str]:
    lines = [f"# section\t{report.name}", "id\tyear\texpected\tn_predicted\tcorrect\tflags"]
    for o in report.outcomes:
        lines.append("\t".join([
            o.id, str(years.get(o.id, "")), o.expected, str(len(o.predicted)),
            "1" if o.correct else "0", ",".join(o.flags) or "-",
        ]))
    for k, v in report.summary().items():
        lines.append(f"# {report.name}.{k}\t{v}")
    return lines


def run_validation(records: Sequence[ReactionRecord], config: ValidationConfig = ValidationConfig()) -> ValidationResult:
    """Time-split validation with an access audit around graph construction."""
    train, test = time_split(records, config.cutoff)
    # only binary reactions can be predicted from a reactant pair
    test = [r for r in test if r.is_binary]
    access = AccessLog()
    tracked_train = access.wrap(train, "train")
    tracked_test = access.wrap(test, "test")

    with access.during("build"):
        g = build_graph(tracked_train, config.params.fp_radius, config.params.fp_variant)
        templates = extract_templates(tracked_train, config.template_radius)
    if access.reads("build", "test"):
        raise LeakageError("test records were read during graph construction")
    test_ids = {r.id for r in test}
    if any(r.id in test_ids for r in g.reactions):
        raise LeakageError("a test record is part of the training graph")

    with access.during("evaluate"):
        forward = evaluate_forward(g, tracked_test, config.params)
        rules = evaluate_rules(templates, tracked_test)
        rnd = random_baseline(list(tracked_test), config.seed)
        result = ValidationResult(forward, rules, rnd, access=access, n_train=len(train),
                                  n_test=len(test), n_templates=len(templates))
        if config.novel_only:
            novel = novel_type_split(tracked_test, templates)
            result.novel = evaluate_forward(g, novel, config.params, name="novel_path_model")
            result.novel_rules = evaluate_rules(templates, novel)
            result.novel_rules.name = "novel_rule_baseline"
        if config.negative:
            result.negative = negative_validation(g, tracked_test, templates, config.params)
        if config.scaling:
            result.scaling = scaling_study(train, config.scaling, list(tracked_test), config.seed, config.params)

    years = {r.id: r.year for r in records}
    lines = [
        "# rxngraph validation report",
        f"# cutoff\t{config.cutoff}",
        f"# seed\t{config.seed}",
        f"# threshold\t{config.params.tanimoto_threshold}",
        f"# max_paths\t{config.params.max_paths}",
        f"# max_length\t{config.params.max_length}",
        f"# template_radius\t{config.template_radius}",
        f"# train\t{len(train)}",
        f"# test\t{len(test)}",
        f"# templates\t{len(templates)}",
    ]
    for report in (forward, rules, rnd, result.novel, result.novel_rules):
        if report is not None:
            lines.extend(_outcome_lines(report, years))
    if result.negative is not None:
        neg = result.negative
        lines.append("# section\tnegative_validation")
        lines.append("id\twrong\trejected")
        for row in neg.rows:
            lines.append(f"{row.id}\t{len(row.wrong)}\t{len(row.rejected)}")
        lines.append(f"# negative.wrong\t{neg.wrong}")
        lines.append(f"# negative.rejected\t{neg.rejected}")
        lines.append(f"# negative.rejection_rate\t{neg.rejection_rate:.6f}")
    if result.scaling is not None:
        lines.append("# section\tscaling")
        lines.append("edges\taccuracy")
        for frac, edges, acc in result.scaling:
            lines.append(f"{edges}\t{acc:.6f}")
    result.text = "\n".join(lines) + "\n"
    return result


__all__ = ["LeakageError", "ValidationConfig", "ValidationResult", "run_validation"]
