"""Compare the compiled search kernel with the pure-Python fallback.

Builds a synthetic graph, runs the same pair queries through a search index
on each backend, checks that both return identical paths, and prints
per-query timings.

    python3 benchmarks/bench_kernels.py --reactions 5000 --pairs 200
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

from rxngraph import _backend, _pykernels, synth
from rxngraph.kgraph import build_graph
from rxngraph.reasoner import SearchIndex, SearchParams


def _time_queries(index: SearchIndex, pairs, params: SearchParams):
    times, results = [], []
    for a, b in pairs:
        start = time.perf_counter()
        results.append([p.nodes for p in index.search(a, b, params)])
        times.append(time.perf_counter() - start)
    return times, results


def _pairwise_tanimoto(kernel, n_rxn: int, samples: int, rng: random.Random) -> float:
    pairs = [(rng.randrange(n_rxn), rng.randrange(n_rxn)) for _ in range(samples)]
    start = time.perf_counter()
    for a, b in pairs:
        kernel.tanimoto(a, b)
    return time.perf_counter() - start


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reactions", type=int, default=5000)
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    start = time.perf_counter()
    g = build_graph(synth.throughput_records(args.reactions))
    print(f"graph\t{g.n_molecules} molecules\t{g.n_reactions} reactions\t{time.perf_counter() - start:.1f}s")

    rng = random.Random(args.seed)
    reactants = sorted({m for rs in g.reactant_nodes for m in rs})
    pairs = [tuple(rng.sample(reactants, 2)) for _ in range(args.pairs)]
    params = SearchParams()

    backends = {"python": _pykernels}
    if _backend.BACKEND == "compiled":
        backends["compiled"] = _backend
    else:
        print("compiled kernel not built; timing the Python fallback only")

    outcome = {}
    for name, module in backends.items():
        # the pair cache would favour whichever backend runs second; disable it
        index = SearchIndex.from_graph(g, use_cache=False, backend=module)
        times, results = _time_queries(index, pairs, params)
        tan = _pairwise_tanimoto(index.kernel, g.n_reactions, 20000, random.Random(args.seed))
        outcome[name] = results
        print(f"{name}\tsearch median {statistics.median(times) * 1e3:.3f} ms"
              f"\tmax {max(times) * 1e3:.3f} ms\ttotal {sum(times):.3f} s"
              f"\ttanimoto x20000 {tan:.3f} s")
        outcome[name + ".total"] = sum(times)

    if "compiled" in backends:
        same = outcome["compiled"] == outcome["python"]
        print(f"identical results\t{same}")
        print(f"speedup\t{outcome['python.total'] / outcome['compiled.total']:.1f}x")
        return 0 if same else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
