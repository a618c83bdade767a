from __future__ import annotations

import sys
from pathlib import Path

import pytest

from rxngraph import kgraph, synth
from rxngraph.kgraph import build_graph

TESTS = Path(__file__).parent
DATA = TESTS / "data"
sys.path.insert(0, str(TESTS))


def fixture_lines(name: str) -> list[str]:
    return synth.data_path(name).read_text(encoding="utf-8").splitlines(keepends=True)


@pytest.fixture(scope="session")
def amide_chain_records():
    return synth.load_fixture("amide_chain.tsv")


@pytest.fixture(scope="session")
def amide_chain_graph(amide_chain_records):
    return build_graph(amide_chain_records)


@pytest.fixture(scope="session")
def amide_chain_conditions_graph():
    return build_graph(synth.load_fixture("amide_chain_conditions.tsv"))


@pytest.fixture(scope="session")
def filter_pair_graph():
    return build_graph(synth.load_fixture("filter_pair.tsv"))


@pytest.fixture(scope="session")
def desk_records():
    return synth.load_fixture("desk_corpus.tsv")


@pytest.fixture(scope="session")
def desk_graph(desk_records):
    return build_graph(desk_records)


@pytest.fixture(scope="session")
def crossed():
    return synth.crossed_records()


@pytest.fixture(scope="session")
def throughput_snapshot(tmp_path_factory):
    """A saved graph with 10^5 reactant edges; built once per session."""
    g = build_graph(synth.throughput_records())
    path = tmp_path_factory.mktemp("throughput") / "graph.kg"
    kgraph.save(g, path)
    return path, g


def mol_id(g, smiles: str) -> int:
    return g.molecule_id(smiles)
