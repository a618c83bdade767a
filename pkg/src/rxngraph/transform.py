"""Half reactions, product generation by merging halves, and condition sets.

A binary reaction splits into two half reactions, one per reactant.  Each
half records what happens to its own reactant: bond edits among its atoms,
atom state edits, atoms it loses, and the bonds it forms to the partner.
Merging a half of one molecule with a half of another rebuilds a product.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .chem.molecule import Atom, Molecule, check_valence, split_fragments
from .chem.reaction import ReactionRecord
from .errors import NoMappingError, NotAReactant, NotBinary, NotComplementary, UnknownMolecule, ValenceOverflow
from .kgraph import KnowledgeGraph
from .reasoner import COMPLEMENTARY, Path, classify_path


@dataclass(frozen=True)
class HalfReaction:
    """One reactant's share of a binary reaction.

    ``bond_edits`` holds ``(a, b, new_order)`` over owner atoms, with order 0
    for a broken bond.  ``atom_edits`` holds ``(atom, charge, hydrogens,
    aromatic)`` for atoms whose state changes.  ``interface_bonds`` holds
    ``(atom, order)`` for each bond formed to the partner.
    """

    owner: Molecule
    bond_edits: tuple[tuple[int, int, int], ...] = ()
    atom_edits: tuple[tuple[int, int, int, bool], ...] = ()
    interface_bonds: tuple[tuple[int, int], ...] = ()
    lost_atoms: frozenset[int] = frozenset()
    source: str = ""

    def __post_init__(self):
        n = len(self.owner.atoms)
        for atom, _ in self.interface_bonds:
            if not 0 <= atom < n or atom in self.lost_atoms:
                raise ValueError(f"interface atom {atom} is not a retained owner atom")

    @property
    def is_empty(self) -> bool:
        return not (self.bond_edits or self.atom_edits or self.interface_bonds or self.lost_atoms)

    @property
    def interface_orders(self) -> tuple[int, ...]:
        return tuple(sorted(o for _, o in self.interface_bonds))

    def fragment(self) -> tuple[list[Atom], dict[tuple[int, int], int], dict[int, int]]:
        """Owner after its own edits: (atoms, bonds, old index -> new index)."""
        atoms = [replace(a, map_index=0) for a in self.owner.atoms]
        for i, charge, h, aromatic in self.atom_edits:
            atoms[i] = Atom(atoms[i].element, charge, h, aromatic)
        bonds = {(a, b): o for a, b, o in self.owner.bonds}
        for a, b, o in self.bond_edits:
            if o:
                bonds[(a, b)] = o
            else:
                bonds.pop((a, b), None)
        keep = [i for i in range(len(atoms)) if i not in self.lost_atoms]
        where = {old: new for new, old in enumerate(keep)}
        kept_bonds = {
            (where[a], where[b]): o for (a, b), o in bonds.items() if a in where and b in where
        }
        return [atoms[i] for i in keep], kept_bonds, where


def _locate(record: ReactionRecord, reactant: Molecule | int) -> int:
    if isinstance(reactant, int):
        if not 0 <= reactant < len(record.reactants):
            raise NotAReactant(f"reaction {record.id!r} has no reactant {reactant}")
        return reactant
    for i, mol in enumerate(record.reactants):
        if mol is reactant:
            return i
    key = reactant.canonical_key
    for i, mol in enumerate(record.reactants):
        if mol.canonical_key == key:
            return i
    raise NotAReactant(f"{key} is not a reactant of reaction {record.id!r}")


def derive_half_reaction(record: ReactionRecord, reactant: Molecule | int) -> HalfReaction:
    """Split off the half reaction of ``reactant`` (a Molecule or reactant index)."""
    if not record.is_binary:
        raise NotBinary(f"reaction {record.id!r} has {len(record.reactants)} reactants")
    k = _locate(record, reactant)
    owner = record.reactants[k]
    pmaps = record.product_maps
    rmaps = record.reactant_maps
    if not set(rmaps) & set(pmaps):
        raise NoMappingError(f"reaction {record.id!r} shares no atom maps between sides")

    image: dict[int, tuple[int, int]] = {}
    lost = set()
    for i, atom in enumerate(owner.atoms):
        if atom.map_index and atom.map_index in pmaps:
            image[i] = pmaps[atom.map_index]
        else:
            lost.add(i)
    atom_edits = []
    for i, (pj, pi) in sorted(image.items()):
        a, p = owner.atoms[i], record.products[pj].atoms[pi]
        if (a.charge, a.explicit_h, a.aromatic) != (p.charge, p.explicit_h, p.aromatic):
            atom_edits.append((i, p.charge, p.explicit_h, p.aromatic))

    def product_order(i: int, j: int) -> int:
        (pa, ia), (pb, ib) = image[i], image[j]
        return record.products[pa].bond_order(ia, ib) if pa == pb else 0

    bond_edits = []
    for a, b, o in owner.bonds:
        if a in image and b in image:
            new = product_order(a, b)
            if new != o:
                bond_edits.append((a, b, new))
    retained = sorted(image)
    for x, a in enumerate(retained):
        for b in retained[x + 1:]:
            if not owner.bond_order(a, b):
                new = product_order(a, b)
                if new:
                    bond_edits.append((a, b, new))

    # partner atoms, by product position
    partner = record.reactants[1 - k]
    partner_images = {
        pmaps[atom.map_index]
        for atom in partner.atoms
        if atom.map_index and atom.map_index in pmaps
    }
    interface = []
    for i, (pj, pi) in sorted(image.items()):
        for nb, order in record.products[pj].adjacency[pi]:
            if (pj, nb) in partner_images:
                interface.append((i, order))
    return HalfReaction(
        owner,
        tuple(sorted(bond_edits)),
        tuple(atom_edits),
        tuple(sorted(interface)),
        frozenset(lost),
        record.id,
    )


def principal_product(mols: Sequence[Molecule]) -> Molecule:
    """Largest molecule by atom count; ties broken by smallest canonical key."""
    if not mols:
        raise ValueError("no molecules")
    return min(mols, key=lambda m: (-len(m.atoms), m.canonical_key))


def _pairings(h1: HalfReaction, h2: HalfReaction) -> Iterable[list[tuple[int, int, int]]]:
    """Every order-preserving one-to-one pairing of the two interface lists."""
    g1: dict[int, list[int]] = defaultdict(list)
    g2: dict[int, list[int]] = defaultdict(list)
    for atom, order in h1.interface_bonds:
        g1[order].append(atom)
    for atom, order in h2.interface_bonds:
        g2[order].append(atom)
    orders = sorted(g1)
    options = []
    for order in orders:
        opts = {tuple(p) for p in itertools.permutations(g2[order])}
        options.append([(order, p) for p in sorted(opts)])
    for combo in itertools.product(*options):
        bonds = []
        for order, perm in combo:
            bonds.extend((a, b, order) for a, b in zip(g1[order], perm))
        yield bonds


def join_halves(h1: HalfReaction, h2: HalfReaction, cross: Iterable[tuple[int, int, int]]) -> list[Molecule] | None:
    """Apply both halves and add the ``(h1_atom, h2_atom, order)`` bonds.

    Returns the resulting fragments, or None when a cross bond repeats a
    bond or an interface atom would exceed its maximum valence.
    """
    atoms1, bonds1, where1 = h1.fragment()
    atoms2, bonds2, where2 = h2.fragment()
    off = len(atoms1)
    atoms = atoms1 + atoms2
    bonds = dict(bonds1)
    bonds.update({(a + off, b + off): o for (a, b), o in bonds2.items()})
    touched = set()
    for a, b, order in cross:
        if a not in where1 or b not in where2:
            return None
        key = (where1[a], where2[b] + off)
        if key in bonds:
            return None
        bonds[key] = order
        touched.update(key)
    orders: dict[int, list[int]] = defaultdict(list)
    for (a, b), o in bonds.items():
        if a in touched:
            orders[a].append(o)
        if b in touched:
            orders[b].append(o)
    try:
        for i in sorted(touched):
            check_valence(atoms[i], orders[i])
    except ValenceOverflow:
        return None
    return split_fragments(atoms, [(a, b, o) for (a, b), o in sorted(bonds.items())])


def merge_pairings(h1: HalfReaction, h2: HalfReaction) -> list[list[Molecule]]:
    """Fragment lists, one per valid atom pairing of the two interfaces.

    Incompatible interface multisets give no pairings.  Pairings that repeat
    a bond or overload an interface atom's valence are dropped.
    """
    if h1.interface_orders != h2.interface_orders:
        return []
    results = []
    for pairing in _pairings(h1, h2):
        frags = join_halves(h1, h2, pairing)
        if frags is not None:
            results.append(frags)
    return results


def merge_half_reactions(h1: HalfReaction, h2: HalfReaction) -> list[Molecule]:
    """All product fragments over all valid pairings, unique by canonical key.

    Sorted principal-first: by descending atom count, then canonical key.
    """
    seen: dict[str, Molecule] = {}
    for frags in merge_pairings(h1, h2):
        for mol in frags:
            seen.setdefault(mol.canonical_key, mol)
    return sorted(seen.values(), key=lambda m: (-len(m.atoms), m.canonical_key))


def merge_principal(h1: HalfReaction, h2: HalfReaction) -> list[Molecule]:
    """Principal product of each valid pairing, unique by canonical key."""
    seen: dict[str, Molecule] = {}
    for frags in merge_pairings(h1, h2):
        mol = principal_product(frags)
        seen.setdefault(mol.canonical_key, mol)
    return [seen[k] for k in sorted(seen)]


# -- graph-level operations ----------------------------------------------

def half_reaction(g: KnowledgeGraph, rid: int, mid: int) -> HalfReaction | None:
    """Cached half reaction of molecule ``mid`` in reaction ``rid``; None if underivable."""
    cache = g.cached("half-reactions", dict)
    key = (rid, mid)
    if key not in cache:
        try:
            cache[key] = derive_half_reaction(g.reactions[rid], g.reactant_index(rid, mid))
        except (NotBinary, NoMappingError):
            cache[key] = None
    return cache[key]


def predict_conditions(g: KnowledgeGraph, path: Path) -> frozenset[tuple[int, str]]:
    """Agents of the first and last reaction of a complementary path, as a set union."""
    if classify_path(path) != COMPLEMENTARY:
        raise NotComplementary(f"path of length {path.length} is not complementary")
    first, last = path.reactions[0], path.reactions[-1]
    return g.agents(first) | g.agents(last)


@dataclass
class Prediction:
    product: Molecule
    supporting_paths: list[Path] = field(default_factory=list)
    conditions: frozenset[tuple[int, str]] = frozenset()

    @property
    def score(self) -> int:
        return len(self.supporting_paths)

    @property
    def key(self) -> str:
        return self.product.canonical_key


def _merged(g: KnowledgeGraph, r1: int, m1: int, r2: int, m2: int) -> list[Molecule]:
    """Cached principal products of merging two graph half reactions."""
    cache = g.cached("merges", dict)
    key = (r1, m1, r2, m2)
    if key not in cache:
        h1, h2 = half_reaction(g, r1, m1), half_reaction(g, r2, m2)
        cache[key] = [] if h1 is None or h2 is None else merge_principal(h1, h2)
    return cache[key]


def predict_products(g: KnowledgeGraph, m1: int, mL: int, paths: Sequence[Path]) -> list[Prediction]:
    """Products of all complementary paths, grouped by canonical key.

    Score is the number of supporting paths; conditions are the union of
    the supporting paths' condition sets.  Sorted by descending score, then key.
    """
    groups: dict[str, Prediction] = {}
    for path in paths:
        if path.classification != COMPLEMENTARY:
            continue
        if path.nodes[0] == m1 and path.nodes[-1] == mL:
            first, last = path.reactions[0], path.reactions[-1]
        elif path.nodes[0] == mL and path.nodes[-1] == m1:
            first, last = path.reactions[-1], path.reactions[0]
        else:
            raise ValueError("path does not connect the query molecules")
        products = _merged(g, first, m1, last, mL)
        if not products:
            continue
        conditions = predict_conditions(g, path)
        for mol in products:
            pred = groups.setdefault(mol.canonical_key, Prediction(mol))
            pred.supporting_paths.append(path)
            pred.conditions = pred.conditions | conditions
    return sorted(groups.values(), key=lambda p: (-p.score, p.key))


def half_reactions_of(g: KnowledgeGraph, mid: int) -> list[HalfReaction]:
    out = []
    for rid in g.neighbors(mid, "reactant"):
        h = half_reaction(g, rid, mid)
        if h is not None:
            out.append(h)
    return out


def enumerate_all_merges(g: KnowledgeGraph, m1: int, mL: int) -> list[Molecule]:
    """Upper-bound mode: merge every half reaction of m1 with every half of mL."""
    for m in (m1, mL):
        if not 0 <= m < g.n_molecules:
            raise UnknownMolecule(f"molecule id {m}")
    seen: dict[str, Molecule] = {}
    for r1 in g.neighbors(m1, "reactant"):
        for r2 in g.neighbors(mL, "reactant"):
            for mol in _merged(g, r1, m1, r2, mL):
                seen.setdefault(mol.canonical_key, mol)
    return [seen[k] for k in sorted(seen)]


__all__ = [
    "HalfReaction", "Prediction", "derive_half_reaction", "enumerate_all_merges",
    "half_reaction", "half_reactions_of", "join_halves", "merge_half_reactions", "merge_pairings",
    "merge_principal", "predict_conditions", "predict_products", "principal_product",
]
