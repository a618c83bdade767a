from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA
from rxngraph.chem import (
    AROMATIC,
    SINGLE,
    Atom,
    Molecule,
    parse_molecule,
    parse_reaction,
    parse_smiles,
    reaction_center,
    write_smiles,
)
from rxngraph.chem.canon import canonical_order, equitable_classes
from rxngraph.errors import NoMappingError, RecordError, SmilesSyntaxError, UnsupportedFeature
from rxngraph.kgraph import read_records


@pytest.fixture(scope="module")
def fixtures():
    return {r.id: r for _, r in read_records(open(DATA / "chem_fixtures.tsv", encoding="utf-8"))}


# -- parsing --------------------------------------------------------------

def test_parse_ethanol():
    (mol,) = parse_smiles("CCO")
    assert [a.element for a in mol.atoms] == ["C", "C", "O"]
    assert [a.explicit_h for a in mol.atoms] == [3, 2, 1]
    assert mol.bonds == ((0, 1, SINGLE), (1, 2, SINGLE))


def test_parse_map_indices():
    mol = parse_molecule("[CH3:1][Br:2]")
    assert [a.map_index for a in mol.atoms] == [1, 2]
    assert mol.atoms[1].explicit_h == 0


def test_unbalanced_parenthesis_offset():
    with pytest.raises(SmilesSyntaxError) as err:
        parse_smiles("C(C")
    assert err.value.offset == 3


@pytest.mark.parametrize("text", ["C[", "C1CC", "C)C", "[Xx]", "C=", "C..C"])
def test_syntax_errors(text):
    with pytest.raises(SmilesSyntaxError):
        parse_smiles(text)


@pytest.mark.parametrize("text,token", [("F/C=C/F", "/"), ("N[C@@H](C)C(=O)O", "@"), ("[13CH4]", "13")])
def test_unsupported_features(text, token):
    with pytest.raises(UnsupportedFeature) as err:
        parse_smiles(text)
    assert token in err.value.token


def test_dot_splits_fragments():
    mols = parse_smiles("CC.O")
    assert [len(m) for m in mols] == [2, 1]


def test_ring_closures_and_percent_labels():
    a = parse_molecule("C1CCCCC1")
    b = parse_molecule("C%12CCCCC%12")
    assert a.canonical_key == b.canonical_key
    assert len(a.ring_bonds) == 6


def test_charges_and_hydrogens():
    mol = parse_molecule("[NH4+]")
    assert mol.atoms[0].charge == 1 and mol.atoms[0].explicit_h == 4
    mol = parse_molecule("C(=O)[O-]")
    assert mol.atoms[2].charge == -1


def test_aromatic_as_written():
    mol = parse_molecule("c1ccccc1")
    assert all(a.aromatic for a in mol.atoms)
    assert all(o == AROMATIC for *_, o in mol.bonds)
    assert all(a.explicit_h == 1 for a in mol.atoms)


def test_bracket_hydrogen_folds_into_count():
    mol = parse_molecule("[H]OC")
    assert [a.element for a in mol.atoms] == ["O", "C"]
    assert mol.atoms[0].explicit_h == 1


# -- molecule invariants ---------------------------------------------------

def test_molecule_rejects_bad_graphs():
    c = Atom("C")
    with pytest.raises(RecordError):
        Molecule((c, c), ())
    with pytest.raises(RecordError):
        Molecule((c, c), ((0, 0, SINGLE),))
    with pytest.raises(RecordError):
        Molecule((c, c), ((0, 1, SINGLE), (1, 0, SINGLE)))
    with pytest.raises(RecordError):
        Atom("Xx")


# -- writing and canonical keys ---------------------------------------------

def test_write_single_carbon():
    assert write_smiles(parse_molecule("C")) == "C"


@pytest.mark.parametrize("text", ["CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "[NH4+]", "C#N",
                                  "OB(O)c1ccccc1", "C1CC2CCC1CC2", "[O-][n+]1ccccc1"])
def test_round_trip(text):
    mol = parse_molecule(text)
    again = parse_molecule(write_smiles(mol))
    assert again.canonical_key == mol.canonical_key
    assert sum(a.aromatic for a in again.atoms) == sum(a.aromatic for a in mol.atoms)


def test_equal_and_distinct_keys():
    assert parse_molecule("OCC").canonical_key == parse_molecule("CCO").canonical_key
    assert parse_molecule("CCO").canonical_key != parse_molecule("CCN").canonical_key


def test_map_indices_ignored_by_key():
    assert parse_molecule("[CH3:4][OH:9]").canonical_key == parse_molecule("CO").canonical_key


def test_key_invariant_under_1000_shuffles():
    """12 heavy atoms with a ring, a branch and heteroatoms."""
    mol = parse_molecule("CC(C)Oc1ccc(cc1)C=O")
    assert len(mol) == 12
    rng = random.Random(5)
    key = mol.canonical_key
    for _ in range(1000):
        order = list(range(len(mol)))
        rng.shuffle(order)
        assert mol.renumber(order).canonical_key == key


def test_symmetric_molecule_classes():
    mol = parse_molecule("ClC(Cl)(Cl)Cl")
    classes = mol.symmetry_classes
    assert len({classes[i] for i in (0, 2, 3, 4)}) == 1
    assert classes[1] != classes[0]


def test_canonical_order_is_permutation():
    mol = parse_molecule("c1ccc2ccccc2c1")
    pos, _ = canonical_order([a.label for a in mol.atoms], mol.bonds)
    assert sorted(pos) == list(range(len(mol)))
    assert len(set(equitable_classes([a.label for a in mol.atoms], mol.adjacency))) == 3


_SMILES_POOL = ["CCO", "c1ccccc1O", "CC(=O)Cl", "NCCN", "C1CCOC1", "CC(C)(C)Br", "O=C(O)c1ccncc1",
                "C=CC#N", "CN(C)C=O", "Clc1ccc(Br)cc1", "CC1=CC(=O)CCC1", "OCC(O)CO"]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(_SMILES_POOL), st.randoms(use_true_random=False))
def test_shuffle_property(text, rnd):
    mol = parse_molecule(text)
    order = list(range(len(mol)))
    rnd.shuffle(order)
    shuffled = mol.renumber(order)
    assert shuffled.canonical_key == mol.canonical_key
    assert parse_molecule(write_smiles(shuffled)).canonical_key == mol.canonical_key


# -- reactions and centres ------------------------------------------------------

def test_record_invariants():
    with pytest.raises(RecordError):
        parse_reaction("CC>>", "x", 2000)
    with pytest.raises(RecordError):
        parse_reaction("[CH4:1]>>[CH4:2]", "x", 2000)
    with pytest.raises(RecordError):
        parse_reaction("C>>C", "x", 1700)


def test_agent_roles_default_to_reagent():
    rec = parse_reaction("CC>O.CO>CC", "x", 2000, ["solvent"])
    assert [r for _, r in rec.agents] == ["solvent", "reagent"]


def test_identity_reaction_center_empty():
    rec = parse_reaction("[CH3:1][OH:2]>>[CH3:1][OH:2]", "id", 2000)
    c = reaction_center(rec)
    assert c.is_empty and not c.changed_bonds


def test_no_mapping():
    with pytest.raises(NoMappingError):
        reaction_center(parse_reaction("CBr.O>>CO", "x", 2000))


def test_sn2_center(fixtures):
    """Hand check: C-Br broken, C-O formed; reactant 1 changes at C and Br."""
    c = reaction_center(fixtures["sn2"])
    assert c.changed_bonds == {(1, 2, "broken"), (1, 3, "formed")}
    assert c.changed_atoms[0] == {0, 1}
    assert c.changed_atoms[1] == {0}


def test_ester_hydrolysis_center_confined(fixtures):
    rec = fixtures["ester_hydrolysis"]
    c = reaction_center(rec)
    ester = rec.reactants[0]
    moiety = {1, 2, 3}  # carbonyl C, carbonyl O, alkoxy O
    assert c.changed_atoms[0] and c.changed_atoms[0] <= moiety
    assert {ester.atoms[i].map_index for i in c.changed_atoms[0]} == {2, 4}


def test_reverse_swaps_formed_and_broken(fixtures):
    rec = fixtures["ester_hydrolysis"]
    fwd, rev = reaction_center(rec), reaction_center(rec.reversed())
    swap = {"formed": "broken", "broken": "formed", "order_changed": "order_changed"}
    assert rev.changed_bonds == {(a, b, swap[k]) for a, b, k in fwd.changed_bonds}
    fwd_maps = {m.atoms[i].map_index for m, s in zip(rec.reactants, fwd.changed_atoms) for i in s}
    rev_maps = {m.atoms[i].map_index for m, s in zip(rec.products, rev.changed_atoms) for i in s}
    assert fwd_maps == rev_maps


def test_spectator_fragment_has_no_changed_atoms():
    rec = parse_reaction("[CH3:1][Br:2].[OH2:3].CCO>>[CH3:1][OH:3]", "x", 2000)
    assert reaction_center(rec).changed_atoms[2] == frozenset()
