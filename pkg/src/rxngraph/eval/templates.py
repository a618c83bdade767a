"""Reaction templates for the rule-based baseline.

A template holds, for each of the two reactants, the reaction-centre atoms
plus their neighbourhood up to ``radius`` bonds, the edits applied to those
atoms, and the bonds formed between the two sides.  Templates are matched
by subgraph monomorphism; hydrogen counts are only compared on centre atoms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from ..chem.canon import canonical_order
from ..chem.molecule import ELEMENT_INDEX, Molecule
from ..chem.reaction import ReactionRecord, reaction_center
from ..errors import NoMappingError
from ..transform import HalfReaction, join_halves, principal_product

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PatternAtom:
    element: str
    charge: int
    aromatic: bool
    hydrogens: int  # -1 outside the centre: not compared
    centre: bool


@dataclass(frozen=True)
class SidePattern:
    atoms: tuple[PatternAtom, ...]
    bonds: tuple[tuple[int, int, int], ...]
    # (a, b, old_order, new_order) over pattern atoms; order 0 means absent
    bond_edits: tuple[tuple[int, int, int, int], ...]
    atom_edits: tuple[tuple[int, int, int, bool], ...]
    lost: frozenset[int]

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        for i, a in enumerate(self.atoms):
            g.add_node(i, atom=a)
        for a, b, o in self.bonds:
            g.add_edge(a, b, order=o)
        return g


@dataclass(frozen=True)
class ReactionTemplate:
    sides: tuple[SidePattern, SidePattern]
    cross: tuple[tuple[int, int, int], ...]
    radius: int
    source: str

    @property
    def key(self) -> tuple:
        return _template_key(self)


def _mol_graph(mol: Molecule) -> nx.Graph:
    g = nx.Graph()
    for i, a in enumerate(mol.atoms):
        g.add_node(i, el=a.element, charge=a.charge, aromatic=a.aromatic, h=a.explicit_h)
    for a, b, o in mol.bonds:
        g.add_edge(a, b, order=o)
    return g


def _node_match(mol_attr, pat_attr) -> bool:
    p: PatternAtom = pat_attr["atom"]
    return (
        mol_attr["el"] == p.element
        and mol_attr["charge"] == p.charge
        and mol_attr["aromatic"] == p.aromatic
        and (p.hydrogens < 0 or mol_attr["h"] == p.hydrogens)
    )


def _edge_match(mol_attr, pat_attr) -> bool:
    return mol_attr["order"] == pat_attr["order"]


def _within(mol: Molecule, seeds: Iterable[int], radius: int) -> list[int]:
    dist = {s: 0 for s in seeds}
    frontier = list(dist)
    for d in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for u, _ in mol.adjacency[v]:
                if u not in dist:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return sorted(dist)


def _side_pattern(mol: Molecule, centre: frozenset[int], half: HalfReaction, radius: int):
    atoms_idx = _within(mol, centre, radius) if centre else []
    where = {old: new for new, old in enumerate(atoms_idx)}
    atoms = tuple(
        PatternAtom(a.element, a.charge, a.aromatic, a.explicit_h if i in centre else -1, i in centre)
        for i, a in ((i, mol.atoms[i]) for i in atoms_idx)
    )
    bonds = tuple(
        (where[a], where[b], o) for a, b, o in mol.bonds if a in where and b in where
    )
    bond_edits = tuple(sorted(
        (min(where[a], where[b]), max(where[a], where[b]), mol.bond_order(a, b), new)
        for a, b, new in half.bond_edits
    ))
    atom_edits = tuple(sorted((where[i], c, h, ar) for i, c, h, ar in half.atom_edits))
    lost = frozenset(where[i] for i in half.lost_atoms)
    return SidePattern(atoms, bonds, bond_edits, atom_edits, lost), where


def _template_key(t: ReactionTemplate) -> tuple:
    """Isomorphism-invariant key over the combined before/after pattern graph."""
    labels = []
    offsets = []
    for s, side in enumerate(t.sides):
        offsets.append(len(labels))
        edits = {i: (c, h, int(ar)) for i, c, h, ar in side.atom_edits}
        for i, a in enumerate(side.atoms):
            labels.append((
                s, ELEMENT_INDEX[a.element], a.charge, int(a.aromatic), a.hydrogens,
                int(a.centre), int(i in side.lost), edits.get(i, (99, 99, 99)),
            ))
    edges = {}
    for s, side in enumerate(t.sides):
        off = offsets[s]
        for a, b, o in side.bonds:
            edges[(a + off, b + off)] = 10 * o + o
        for a, b, old, new in side.bond_edits:
            edges[(a + off, b + off)] = 10 * old + new
    for a, b, o in t.cross:
        edges[(a + offsets[0], b + offsets[1])] = 100 + o
    edge_list = [(a, b, lab) for (a, b), lab in sorted(edges.items())]
    _, cert = canonical_order(labels, edge_list)
    return (tuple(sorted(set(labels))), cert, t.radius)


def extract_template(record: ReactionRecord, radius: int = 1) -> ReactionTemplate | None:
    """Template of a binary mapped record, or None if it cannot be built."""
    from ..transform import derive_half_reaction

    if not record.is_binary:
        return None
    try:
        center = reaction_center(record)
    except NoMappingError:
        return None
    halves = [derive_half_reaction(record, k) for k in (0, 1)]
    sides, wheres = [], []
    for k in (0, 1):
        side, where = _side_pattern(record.reactants[k], center.changed_atoms[k], halves[k], radius)
        sides.append(side)
        wheres.append(where)
    pmaps = record.product_maps
    owner_of = {}
    for k, mol in enumerate(record.reactants):
        for i, a in enumerate(mol.atoms):
            if a.map_index in pmaps:
                owner_of[pmaps[a.map_index]] = (k, i)
    cross = []
    for pj, prod in enumerate(record.products):
        for a, b, o in prod.bonds:
            ea, eb = owner_of.get((pj, a)), owner_of.get((pj, b))
            if ea and eb and ea[0] != eb[0]:
                (ka, ia), (kb, ib) = sorted((ea, eb))
                if ia not in wheres[0] or ib not in wheres[1]:
                    return None
                cross.append((wheres[0][ia], wheres[1][ib], o))
    return ReactionTemplate((sides[0], sides[1]), tuple(sorted(cross)), radius, record.id)


def _matches(side: SidePattern, mol: Molecule, mol_graph: nx.Graph | None = None) -> list[dict[int, int]]:
    """Pattern-atom -> molecule-atom maps, unique by the images of centre atoms."""
    if not side.atoms:
        return [{}]
    gm = GraphMatcher(mol_graph if mol_graph is not None else _mol_graph(mol), side.graph(),
                      node_match=_node_match, edge_match=_edge_match)
    centre = [i for i, a in enumerate(side.atoms) if a.centre]
    out = {}
    for mapping in gm.subgraph_monomorphisms_iter():
        inv = {p: m for m, p in mapping.items()}
        key = tuple(inv[i] for i in centre)
        if key in out:
            continue
        # an edit that expects a missing bond must find none in the molecule
        if all(mol.bond_order(inv[a], inv[b]) == old for a, b, old, _ in side.bond_edits):
            out[key] = inv
    return [out[k] for k in sorted(out)]


def _half_from_match(side: SidePattern, mol: Molecule, inv: dict[int, int], cross_atoms) -> HalfReaction:
    bond_edits = tuple(sorted(
        (min(inv[a], inv[b]), max(inv[a], inv[b]), new) for a, b, _, new in side.bond_edits
    ))
    atom_edits = tuple(sorted((inv[i], c, h, ar) for i, c, h, ar in side.atom_edits))
    lost = frozenset(inv[i] for i in side.lost)
    interface = tuple(sorted((inv[i], o) for i, o in cross_atoms))
    return HalfReaction(mol, bond_edits, atom_edits, interface, lost)


def apply_template(t: ReactionTemplate, first: Molecule, second: Molecule, _graphs=None) -> list[Molecule]:
    """Principal products of ``t`` with side 0 on ``first`` and side 1 on ``second``."""
    g1, g2 = _graphs if _graphs else (None, None)
    m1 = _matches(t.sides[0], first, g1)
    if not m1:
        return []
    m2 = _matches(t.sides[1], second, g2)
    out = []
    for inv1 in m1:
        h1 = _half_from_match(t.sides[0], first, inv1, [(a, o) for a, _, o in t.cross])
        for inv2 in m2:
            h2 = _half_from_match(t.sides[1], second, inv2, [(b, o) for _, b, o in t.cross])
            cross = [(inv1[a], inv2[b], o) for a, b, o in t.cross]
            frags = join_halves(h1, h2, cross)
            if frags:
                out.append(principal_product(frags))
    return out


def apply_templates(templates: Sequence[ReactionTemplate], reactants: Sequence[Molecule]) -> list[Molecule]:
    """All principal products of all templates in both reactant orders, unique by key."""
    if len(reactants) != 2:
        return []
    a, b = reactants
    ga, gb = _mol_graph(a), _mol_graph(b)
    seen: dict[str, Molecule] = {}
    for t in templates:
        for mol in apply_template(t, a, b, (ga, gb)) + apply_template(t, b, a, (gb, ga)):
            seen.setdefault(mol.canonical_key, mol)
    return [seen[k] for k in sorted(seen)]


def extract_templates(records: Iterable[ReactionRecord], radius: int = 1) -> list[ReactionTemplate]:
    """Deduplicated templates, in first-seen order, that reproduce their source product."""
    if not 0 <= radius <= 2:
        raise ValueError("template radius must be 0, 1 or 2")
    out: list[ReactionTemplate] = []
    keys = set()
    for rec in records:
        t = extract_template(rec, radius)
        if t is None:
            continue
        key = t.key
        if key in keys:
            continue
        target = principal_product(rec.products).canonical_key
        produced = {m.canonical_key for m in apply_template(t, *rec.reactants)}
        if target not in produced:
            log.info("template from %s does not reproduce its product; dropped", rec.id)
            continue
        keys.add(key)
        out.append(t)
    return out


__all__ = [
    "PatternAtom", "ReactionTemplate", "SidePattern", "apply_template", "apply_templates",
    "extract_template", "extract_templates",
]
