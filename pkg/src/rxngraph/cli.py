"""Command-line front end.

Exit status: 0 on success, 1 on usage errors, 2 on data errors.  Results go
to standard output as TAB-separated lines, diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import logging
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from . import kgraph
from .errors import RxnGraphError
from .eval.pipeline import ValidationConfig, run_validation
from .kgraph import KnowledgeGraph
from .reasoner import COMPLEMENTARY, SearchParams, explain, find_paths
from .transform import enumerate_all_merges, predict_conditions, predict_products


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# config keys and the flags they mirror
CONFIG_KEYS = {
    "threshold": float, "max_paths": int, "max_length": int, "fp_variant": str, "fp_radius": int,
    "common_atoms": str, "template_radius": int, "seed": int, "cutoff": int, "workers": int,
    "corpus": str, "load": str, "save": str, "report": str,
}


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; blank lines and ``#`` comments are ignored."""
    out = {}
    for no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{no}: unknown config key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise UsageError(f"{path}:{no}: bad value for {key!r}") from None
    return out


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", help="reaction record file to ingest")
    p.add_argument("--load", help="graph snapshot to load")


def _search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=float, default=0.2)
    p.add_argument("--max-paths", dest="max_paths", type=int, default=1000)
    p.add_argument("--max-length", dest="max_length", type=int, default=10)
    p.add_argument("--fp-variant", dest="fp_variant", default="structural",
                   choices=("structural", "functional"))
    p.add_argument("--fp-radius", dest="fp_radius", type=int, default=2)
    p.add_argument("--common-atoms", dest="common_atoms", default="equal", choices=("equal", "intersect"))


def _pair_args(p: argparse.ArgumentParser, batch: bool = False) -> None:
    p.add_argument("--from", dest="source", help="first molecule (SMILES)")
    p.add_argument("--to", dest="target", help="second molecule (SMILES)")
    if batch:
        p.add_argument("--pairs", help="file of TAB-separated SMILES pairs, one per line")
        p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rxngraph", description="Reaction knowledge graph link prediction")
    parser.add_argument("--config", help="key = value configuration file; flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="build a graph from reaction records")
    _graph_args(p)
    p.add_argument("--save", help="write a graph snapshot")

    p = sub.add_parser("stats", help="graph statistics")
    _graph_args(p)

    p = sub.add_parser("predict", help="predict products of two molecules")
    _graph_args(p)
    _search_args(p)
    _pair_args(p, batch=True)
    p.add_argument("--upper-bound", dest="upper_bound", action="store_true",
                   help="merge all half reactions without path search")
    p.add_argument("--explain", action="store_true", help="list supporting paths")
    p.add_argument("--timing", action="store_true", help="report wall time per prediction")

    p = sub.add_parser("explain", help="list the filtered paths between two molecules")
    _graph_args(p)
    _search_args(p)
    _pair_args(p)

    p = sub.add_parser("conditions", help="condition sets of the complementary paths")
    _graph_args(p)
    _search_args(p)
    _pair_args(p)

    p = sub.add_parser("validate", help="time-split validation report")
    p.add_argument("--corpus")
    _search_args(p)
    p.add_argument("--cutoff", type=int, default=2014)
    p.add_argument("--novel-only", dest="novel_only", action="store_true")
    p.add_argument("--negative", action="store_true")
    p.add_argument("--scaling", help="comma-separated training fractions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--template-radius", dest="template_radius", type=int, default=1)
    p.add_argument("--report", help="write the report here instead of standard output")
    return parser


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        config = read_config(known.config)
        # defaults from the file, then flags on top
        for action in parser._subparsers._group_actions[0].choices.values():
            names = {a.dest for a in action._actions}
            action.set_defaults(**{k: v for k, v in config.items() if k in names})
    return parser.parse_args(argv)


def _params(args) -> SearchParams:
    try:
        return SearchParams(args.threshold, args.max_paths, args.max_length, args.fp_variant,
                            args.fp_radius, args.common_atoms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _graph(args) -> KnowledgeGraph:
    if args.load and args.corpus:
        raise UsageError("use either --load or --corpus, not both")
    if args.load:
        return kgraph.load(args.load)
    if args.corpus:
        kw = {}
        if hasattr(args, "fp_radius"):
            kw = {"fp_radius": args.fp_radius, "fp_variant": args.fp_variant}
        g, report = kgraph.ingest_file(args.corpus, **kw)
        print(f"# ingest\t{report.summary()}", file=sys.stderr)
        return g
    raise UsageError("a graph is required: pass --load or --corpus")


def _pair(args) -> tuple[str, str]:
    if not args.source or not args.target:
        raise UsageError("--from and --to are required")
    return args.source, args.target


def _format_conditions(g: KnowledgeGraph, conditions) -> str:
    items = sorted(f"{role}={g.molecules[m].canonical_key}" for m, role in conditions)
    return ",".join(items) or "-"


def cmd_ingest(args) -> None:
    g = _graph(args)
    if args.save:
        kgraph.save(g, args.save)
    _print_stats(g)


def _print_stats(g: KnowledgeGraph) -> None:
    st = kgraph.stats(g)
    print(f"molecules\t{st['molecules']}")
    print(f"reactions\t{st['reactions']}")
    for role, n in st["edges"].items():
        print(f"edges.{role}\t{n}")


def cmd_stats(args) -> None:
    _print_stats(_graph(args))


def _predict_one(g: KnowledgeGraph, params: SearchParams, source: str, target: str, args) -> tuple[list[str], float]:
    start = time.perf_counter()
    a, b = g.molecule_id(source), g.molecule_id(target)
    lines = []
    if args.upper_bound:
        for mol in enumerate_all_merges(g, a, b):
            lines.append(f"{mol.canonical_key}\t1\t-")
    else:
        paths = find_paths(g, a, b, params)
        for pred in predict_products(g, a, b, paths):
            lines.append(f"{pred.key}\t{pred.score}\t{_format_conditions(g, pred.conditions)}")
            if args.explain:
                for path in pred.supporting_paths:
                    lines.extend("#\t" + x for x in explain(g, path, params).splitlines())
    return lines, time.perf_counter() - start


def cmd_predict(args) -> None:
    g = _graph(args)
    params = _params(args)
    if args.pairs:
        pairs = []
        for line in Path(args.pairs).read_text(encoding="utf-8").splitlines():
            if line.strip() and not line.startswith("#"):
                fields = line.split("\t")
                if len(fields) != 2:
                    raise UsageError(f"bad pair line: {line!r}")
                pairs.append((fields[0].strip(), fields[1].strip()))
    else:
        pairs = [_pair(args)]
    # build the search index once before fanning out
    from .reasoner import SearchIndex

    SearchIndex.for_graph(g, params)
    run = lambda pair: _predict_one(g, params, pair[0], pair[1], args)
    if args.workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(args.workers) as pool:
            results = list(pool.map(run, pairs))
    else:
        results = [run(p) for p in pairs]
    times = []
    for (source, target), (lines, seconds) in zip(pairs, results):
        if len(pairs) > 1:
            print(f"# pair\t{source}\t{target}")
        for line in lines:
            print(line)
        times.append(seconds)
        if args.timing:
            print(f"timing\t{source}\t{target}\t{seconds:.6f}", file=sys.stderr)
    if args.timing:
        print(f"timing.median\t{statistics.median(times):.6f}", file=sys.stderr)


def cmd_explain(args) -> None:
    g = _graph(args)
    params = _params(args)
    source, target = _pair(args)
    paths = find_paths(g, g.molecule_id(source), g.molecule_id(target), params)
    for path in paths:
        print(explain(g, path, params))
    print(f"# paths\t{len(paths)}", file=sys.stderr)


def cmd_conditions(args) -> None:
    g = _graph(args)
    params = _params(args)
    source, target = _pair(args)
    paths = find_paths(g, g.molecule_id(source), g.molecule_id(target), params)
    for path in paths:
        if path.classification == COMPLEMENTARY:
            nodes = ",".join(str(n) for n in path.nodes)
            print(f"{nodes}\t{_format_conditions(g, predict_conditions(g, path))}")


def cmd_validate(args) -> None:
    if not args.corpus:
        raise UsageError("--corpus is required")
    with open(args.corpus, encoding="utf-8") as fh:
        records = []
        for no, item in kgraph.read_records(fh):
            if isinstance(item, Exception):
                print(f"# skipped line {no}\t{item}", file=sys.stderr)
            else:
                records.append(item)
    if not records:
        raise RxnGraphError("no usable records in corpus")
    try:
        scaling = tuple(float(x) for x in args.scaling.split(",")) if args.scaling else ()
    except ValueError:
        raise UsageError("--scaling expects comma-separated numbers") from None
    if any(not 0.0 <= f <= 1.0 for f in scaling):
        raise UsageError("--scaling fractions must lie in [0, 1]")
    if not 0 <= args.template_radius <= 2:
        raise UsageError("--template-radius must be 0, 1 or 2")
    config = ValidationConfig(args.cutoff, args.novel_only, args.negative, scaling, args.seed,
                              args.template_radius, _params(args))
    result = run_validation(records, config)
    if args.report:
        Path(args.report).write_text(result.text, encoding="utf-8")
    else:
        sys.stdout.write(result.text)


COMMANDS = {
    "ingest": cmd_ingest, "stats": cmd_stats, "predict": cmd_predict, "explain": cmd_explain,
    "conditions": cmd_conditions, "validate": cmd_validate,
}


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rxngraph: usage error: {exc}", file=sys.stderr)
        return 1
    except (RxnGraphError, OSError) as exc:
        print(f"rxngraph: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
