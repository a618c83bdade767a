"""Atom-mapped reaction records and reaction-centre extraction."""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import NoMappingError, RecordError
from .molecule import Molecule
from .smiles import parse_smiles, write_smiles

AGENT_ROLES = ("reagent", "catalyst", "solvent")
ROLES = ("reactant",) + AGENT_ROLES + ("product",)
EARLIEST_YEAR = 1771

FORMED, BROKEN, ORDER_CHANGED = "formed", "broken", "order_changed"


@dataclass(frozen=True)
class ReactionRecord:
    id: str
    year: int
    reactants: tuple[Molecule, ...]
    products: tuple[Molecule, ...]
    agents: tuple[tuple[Molecule, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "reactants", tuple(self.reactants))
        object.__setattr__(self, "products", tuple(self.products))
        object.__setattr__(self, "agents", tuple((m, r) for m, r in self.agents))
        if not self.reactants or not self.products:
            raise RecordError("a reaction needs at least one reactant and one product")
        if not EARLIEST_YEAR <= self.year <= datetime.date.today().year:
            raise RecordError(f"implausible publication year {self.year}")
        for mol, role in self.agents:
            if role not in AGENT_ROLES:
                raise RecordError(f"unknown agent role {role!r}")
        left = _map_table(self.reactants, "reactant")
        right = _map_table(self.products, "product")
        missing = sorted(set(right) - set(left))
        if missing:
            raise RecordError(f"product map indices {missing} absent from reactants")

    @property
    def is_binary(self) -> bool:
        return len(self.reactants) == 2

    @property
    def reactant_maps(self) -> dict[int, tuple[int, int]]:
        return _map_table(self.reactants, "reactant")

    @property
    def product_maps(self) -> dict[int, tuple[int, int]]:
        return _map_table(self.products, "product")

    def reversed(self) -> "ReactionRecord":
        return ReactionRecord(self.id + "/rev", self.year, self.products, self.reactants, self.agents)

    def to_smiles(self) -> str:
        left = ".".join(write_smiles(m) for m in self.reactants)
        mid = ".".join(write_smiles(m) for m, _ in self.agents)
        right = ".".join(write_smiles(m) for m in self.products)
        return f"{left}>{mid}>{right}"

    def to_line(self) -> str:
        roles = ",".join(r for _, r in self.agents)
        return f"{self.id}\t{self.year}\t{self.to_smiles()}\t{roles}"


def _map_table(mols: Sequence[Molecule], side: str) -> dict[int, tuple[int, int]]:
    table: dict[int, tuple[int, int]] = {}
    for mi, mol in enumerate(mols):
        for ai, atom in enumerate(mol.atoms):
            if atom.map_index:
                if atom.map_index in table:
                    raise RecordError(f"map index {atom.map_index} repeated on {side} side")
                table[atom.map_index] = (mi, ai)
    return table


def parse_reaction(
    text: str,
    id: str = "",
    year: int = EARLIEST_YEAR,
    roles: Sequence[str] = (),
) -> ReactionRecord:
    """Parse ``reactants>agents>products`` SMILES into a record.

    ``roles`` annotates agent fragments in order; missing or unrecognised
    entries default to ``reagent``.
    """
    parts = text.strip().split(">")
    if len(parts) != 3:
        raise RecordError("reaction SMILES must have the form reactants>agents>products")
    left, mid, right = parts
    reactants = parse_smiles(left) if left else []
    agents = parse_smiles(mid) if mid else []
    products = parse_smiles(right) if right else []
    roles = [r.strip() for r in roles]
    if len(roles) > len(agents):
        raise RecordError(f"{len(roles)} roles given for {len(agents)} agents")
    agent_roles = [
        (roles[i] if i < len(roles) and roles[i] in AGENT_ROLES else "reagent")
        for i in range(len(agents))
    ]
    # agent map labels carry no meaning for the method
    agents = [m.strip_maps() for m in agents]
    return ReactionRecord(id, year, tuple(reactants), tuple(products), tuple(zip(agents, agent_roles)))


@dataclass(frozen=True)
class ReactionCenter:
    """Bonds formed, broken or changed, and the reactant atoms they touch.

    ``changed_bonds`` holds ``(map_a, map_b, change)`` with ``map_a < map_b``.
    ``changed_atoms`` is aligned with the record's reactants.
    """

    changed_bonds: frozenset[tuple[int, int, str]]
    changed_atoms: tuple[frozenset[int], ...]

    @property
    def is_empty(self) -> bool:
        return not self.changed_bonds and not any(self.changed_atoms)


def _bond_table(mols: Sequence[Molecule]) -> dict[tuple[int, int], int]:
    table = {}
    for mol in mols:
        for a, b, order in mol.bonds:
            ma, mb = mol.atoms[a].map_index, mol.atoms[b].map_index
            if ma and mb:
                table[(min(ma, mb), max(ma, mb))] = order
    return table


def _touches_unmapped(mol: Molecule, i: int) -> bool:
    return any(not mol.atoms[j].map_index for j, _ in mol.adjacency[i])


def reaction_center(record: ReactionRecord) -> ReactionCenter:
    """Extract the reaction centre from the atom maps of ``record``.

    Reactant atoms without a product counterpart (leaving groups) count as
    changed, except in fragments that carry no map labels at all.
    """
    rmaps = record.reactant_maps
    pmaps = record.product_maps
    if not set(rmaps) & set(pmaps):
        raise NoMappingError(f"reaction {record.id!r} shares no atom maps between sides")
    rbonds = _bond_table(record.reactants)
    pbonds = _bond_table(record.products)
    changed = set()
    for pair in rbonds.keys() | pbonds.keys():
        before, after = rbonds.get(pair, 0), pbonds.get(pair, 0)
        if before and not after:
            changed.add((pair[0], pair[1], BROKEN))
        elif after and not before:
            changed.add((pair[0], pair[1], FORMED))
        elif before != after:
            changed.add((pair[0], pair[1], ORDER_CHANGED))
    in_changed_bond = {m for a, b, _ in changed for m in (a, b)}

    per_mol = []
    for mol in record.reactants:
        if not mol.mapped:
            per_mol.append(frozenset())
            continue
        atoms = set()
        for i, atom in enumerate(mol.atoms):
            m = atom.map_index
            if not m or m not in pmaps:
                atoms.add(i)
                continue
            pj, pi = pmaps[m]
            patom = record.products[pj].atoms[pi]
            if (
                m in in_changed_bond
                or patom.charge != atom.charge
                or patom.explicit_h != atom.explicit_h
                or _touches_unmapped(mol, i)
                or _touches_unmapped(record.products[pj], pi)
            ):
                atoms.add(i)
        per_mol.append(frozenset(atoms))
    return ReactionCenter(frozenset(changed), tuple(per_mol))


def changed_map_indices(record: ReactionRecord, center: ReactionCenter) -> frozenset[int]:
    """Map labels of changed reactant atoms (unmapped atoms are omitted)."""
    out = set()
    for mol, atoms in zip(record.reactants, center.changed_atoms):
        out.update(mol.atoms[i].map_index for i in atoms if mol.atoms[i].map_index)
    return frozenset(out)
