from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA
from oracles import tanimoto_exact
from rxngraph.chem import parse_molecule, parse_reaction
from rxngraph.errors import RadiusTooLarge, VariantMismatch
from rxngraph.fingerprint import (
    FUNCTIONAL,
    STRUCTURAL,
    CountedFingerprint,
    atom_environments,
    molecule_fingerprint,
    reaction_fingerprint,
    tanimoto_continuous,
)
from rxngraph.kgraph import read_records

GOLDEN = DATA / "golden"


def fp(entries, variant=STRUCTURAL, radius=2):
    return CountedFingerprint(entries, variant, radius)


def _golden(name):
    return CountedFingerprint.from_golden((GOLDEN / name).read_text())


def test_methane_radius_zero():
    f = molecule_fingerprint(parse_molecule("C"), 0)
    assert dict(f.items()) and len(f) == 1 and list(f.entries.values()) == [1]


def test_counts_positive_and_zero_free():
    f = molecule_fingerprint(parse_molecule("CC(=O)Oc1ccccc1"), 2)
    assert all(v >= 1 for v in f.entries.values())
    assert 0 not in fp({1: 0, 2: 3}).entries.values()


def test_radius_bounds():
    with pytest.raises(RadiusTooLarge):
        molecule_fingerprint(parse_molecule("CC"), 6)


def test_shuffle_invariance():
    mol = parse_molecule("OC(=O)c1ccc(N)cc1")
    rng = random.Random(2)
    base = molecule_fingerprint(mol)
    for _ in range(50):
        order = list(range(len(mol)))
        rng.shuffle(order)
        assert molecule_fingerprint(mol.renumber(order)) == base


def test_golden_ethanol_and_ethylamine():
    ethanol = molecule_fingerprint(parse_molecule("CCO"), 2)
    assert ethanol == molecule_fingerprint(parse_molecule("OCC"), 2)
    assert ethanol == _golden("ethanol_r2.tsv")
    ethylamine = molecule_fingerprint(parse_molecule("CCN"), 2)
    assert ethylamine == _golden("ethylamine_r2.tsv")
    assert ethanol != ethylamine


def test_golden_format_sorted():
    text = (GOLDEN / "ethanol_r2.tsv").read_text()
    ids = [int(line.split("\t")[0]) for line in text.splitlines()]
    assert ids == sorted(ids)


@pytest.fixture(scope="module")
def sn2():
    return {r.id: r for _, r in read_records(open(DATA / "chem_fixtures.tsv", encoding="utf-8"))}["sn2"]


def test_sn2_reaction_fingerprint(sn2):
    rfp = reaction_fingerprint(sn2, 2)
    assert rfp == _golden("sn2_reaction_r2.tsv")
    # features that see the C-Br bond vanish, features that see C-O appear
    mebr = atom_environments(sn2.reactants[0].strip_maps(), 2)
    meoh = atom_environments(sn2.products[0].strip_maps(), 2)
    c_br = {mebr[1][0], mebr[1][1]}
    c_o = {meoh[1][0], meoh[1][1]}
    assert all(rfp[f] < 0 for f in c_br)
    assert all(rfp[f] > 0 for f in c_o)


def test_identity_reactions_are_empty():
    assert not reaction_fingerprint(parse_reaction("[CH3:1][OH:2]>>[CH3:1][OH:2]", "i", 2000))
    assert not reaction_fingerprint(parse_reaction("CC.O>>O.CC", "j", 2000))


def test_agents_excluded():
    a = reaction_fingerprint(parse_reaction("[CH3:1][Br:2].[OH2:3]>>[CH3:1][OH:3]", "a", 2000))
    b = reaction_fingerprint(parse_reaction("[CH3:1][Br:2].[OH2:3]>CCO.[Na+]>[CH3:1][OH:3]", "b", 2000))
    assert a == b


def test_reverse_cancels(desk_records):
    from rxngraph.errors import RecordError

    checked = 0
    for rec in desk_records:
        try:
            rev = rec.reversed()
        except RecordError:
            continue  # unbalanced: the reverse is not a valid record
        assert not reaction_fingerprint(rec) + reaction_fingerprint(rev)
        checked += 1
    assert checked >= 10


def test_worked_example():
    x, y = fp({1: 1, 2: 2}), fp({1: 2, 2: 1})
    assert tanimoto_exact(x.entries, y.entries) == pytest.approx(2 / 3)
    assert tanimoto_continuous(x, y) == pytest.approx(0.6667, abs=1e-4)
    assert abs(tanimoto_continuous(x, y) - 4 / 6) < 1e-9


def test_tanimoto_edge_cases():
    x = fp({1: 3, 7: -2})
    assert tanimoto_continuous(x, x) == 1.0
    assert tanimoto_continuous(fp({1: 1}), fp({2: 1})) == 0.0
    assert tanimoto_continuous(fp({}), fp({})) == 0.0
    with pytest.raises(VariantMismatch):
        tanimoto_continuous(fp({1: 1}), fp({1: 1}, FUNCTIONAL))
    with pytest.raises(VariantMismatch):
        tanimoto_continuous(fp({1: 1}), fp({1: 1}, radius=3))


def test_functional_variant_differs():
    mol = parse_molecule("OCCN")
    assert molecule_fingerprint(mol, 2, FUNCTIONAL) != molecule_fingerprint(mol, 2, STRUCTURAL)


_vectors = st.dictionaries(st.integers(0, 20), st.integers(-4, 6), max_size=8)
_nonneg = st.dictionaries(st.integers(0, 20), st.integers(0, 6), max_size=8)


@settings(max_examples=300, deadline=None)
@given(_vectors, _vectors)
def test_symmetry_and_oracle(a, b):
    x, y = fp(a), fp(b)
    assert tanimoto_continuous(x, y) == tanimoto_continuous(y, x)
    exact = tanimoto_exact(x.entries, y.entries)
    assert tanimoto_continuous(x, y) == pytest.approx(max(-1, min(1, float(exact))), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(_nonneg, _nonneg)
def test_nonnegative_range(a, b):
    t = tanimoto_continuous(fp(a), fp(b))
    assert 0.0 <= t <= 1.0


@settings(max_examples=200, deadline=None)
@given(_vectors.filter(lambda d: any(d.values())))
def test_self_similarity(a):
    assert tanimoto_continuous(fp(a), fp(a)) == 1.0


def test_denominator_positive_on_corpus(desk_graph):
    fps = desk_graph.rfps
    for i in range(len(fps)):
        for j in range(i + 1, len(fps)):
            a, b = fps[i].entries, fps[j].entries
            if a or b:
                keys = set(a) | set(b)
                dot = sum(a.get(k, 0) * b.get(k, 0) for k in keys)
                assert sum(v * v for v in a.values()) + sum(v * v for v in b.values()) - dot > 0


def test_determinism_across_runs():
    a = molecule_fingerprint(parse_molecule("c1ccccc1CBr"), 3)
    b = molecule_fingerprint(parse_molecule("BrCc1ccccc1"), 3)
    assert a.to_golden() == b.to_golden()
