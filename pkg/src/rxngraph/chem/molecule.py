"""Atom/bond molecular graph with hydrogens stored as per-atom counts."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

from ..errors import RecordError, ValenceOverflow

SINGLE, DOUBLE, TRIPLE, AROMATIC = 1, 2, 3, 4
BOND_NAMES = {SINGLE: "single", DOUBLE: "double", TRIPLE: "triple", AROMATIC: "aromatic"}

ELEMENTS = (
    "H", "B", "C", "N", "O", "F", "Si", "P", "S", "Cl", "Br", "I",
    "Li", "Na", "K", "Mg", "Ca", "Zn", "Cu", "Pd", "Ni", "Fe", "Sn", "Al",
    "Cs", "Ag", "Au", "Rh", "Ru", "Ir", "Pt", "Mn", "Cr", "Ti", "Se",
)
ELEMENT_INDEX = {sym: i for i, sym in enumerate(ELEMENTS)}

HALOGENS = frozenset({"F", "Cl", "Br", "I"})

# used only to reject impossible merges / template applications
_MAX_VALENCE = {
    "H": 1, "B": 3, "C": 4, "N": 3, "O": 2, "F": 1, "Si": 4, "P": 5,
    "S": 6, "Cl": 1, "Br": 1, "I": 3, "Se": 6,
}
_METAL_VALENCE = 8


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    explicit_h: int = 0
    aromatic: bool = False
    map_index: int = 0

    def __post_init__(self):
        if self.element not in ELEMENT_INDEX:
            raise RecordError(f"unsupported element {self.element!r}")
        if self.explicit_h < 0:
            raise RecordError("negative hydrogen count")

    @property
    def label(self) -> tuple[int, int, int, bool]:
        """Identity-relevant invariants (map index excluded)."""
        return (ELEMENT_INDEX[self.element], self.charge, self.explicit_h, self.aromatic)


def max_valence(element: str, charge: int) -> int:
    base = _MAX_VALENCE.get(element)
    if base is None:
        return _METAL_VALENCE
    if element in ("C", "Si"):
        return base - abs(charge)
    if element == "B":
        return base - charge
    return base + charge


def atom_valence(atom: Atom, orders: Iterable[int]) -> int:
    """Bond valence plus hydrogens; aromatic bonds count one each."""
    return sum(1 if o == AROMATIC else o for o in orders) + atom.explicit_h


def check_valence(atom: Atom, orders: Iterable[int]) -> None:
    if atom_valence(atom, orders) > max_valence(atom.element, atom.charge):
        raise ValenceOverflow(f"{atom.element} exceeds its maximum valence")


def _norm_bond(bond: Sequence[int]) -> tuple[int, int, int]:
    a, b, order = bond
    return (a, b, order) if a < b else (b, a, order)


@dataclass(frozen=True)
class Molecule:
    """A connected molecular graph.

    ``bonds`` holds ``(a, b, order)`` triples with ``a < b``; ``order`` is one
    of SINGLE, DOUBLE, TRIPLE or AROMATIC.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[tuple[int, int, int], ...] = field(default=())

    def __post_init__(self):
        atoms = tuple(self.atoms)
        bonds = tuple(sorted(_norm_bond(b) for b in self.bonds))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "bonds", bonds)
        n = len(atoms)
        if n == 0:
            raise RecordError("molecule has no atoms")
        seen = set()
        for a, b, order in bonds:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise RecordError(f"invalid bond endpoints ({a}, {b})")
            if order not in BOND_NAMES:
                raise RecordError(f"invalid bond order {order}")
            if (a, b) in seen:
                raise RecordError(f"duplicate bond ({a}, {b})")
            seen.add((a, b))
        if len(components(n, bonds)) != 1:
            raise RecordError("molecule graph is not connected")

    @classmethod
    def trusted(cls, atoms: tuple[Atom, ...], bonds: tuple[tuple[int, int, int], ...]) -> "Molecule":
        """Build without validation from atoms and sorted, normalised bonds.

        Only for data this package wrote itself, e.g. a checksummed snapshot.
        """
        mol = object.__new__(cls)
        object.__setattr__(mol, "atoms", atoms)
        object.__setattr__(mol, "bonds", bonds)
        return mol

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for a, b, order in self.bonds:
            adj[a].append((b, order))
            adj[b].append((a, order))
        return tuple(tuple(sorted(x)) for x in adj)

    @cached_property
    def bond_lookup(self) -> dict[tuple[int, int], int]:
        return {(a, b): o for a, b, o in self.bonds}

    def bond_order(self, a: int, b: int) -> int:
        """Order of the bond between a and b, 0 if unbonded."""
        return self.bond_lookup.get((a, b) if a < b else (b, a), 0)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    @cached_property
    def ring_bonds(self) -> frozenset[tuple[int, int]]:
        """Bonds that lie on at least one cycle (i.e. are not bridges)."""
        bridges = find_bridges(len(self.atoms), self.adjacency)
        return frozenset((a, b) for a, b, _ in self.bonds if (a, b) not in bridges)

    @cached_property
    def ring_atoms(self) -> frozenset[int]:
        return frozenset(i for bond in self.ring_bonds for i in bond)

    @cached_property
    def symmetry_classes(self) -> tuple[int, ...]:
        """Isomorphism-invariant class per atom from neighbourhood refinement.

        Used to compare atom sets of the same molecule across differently
        numbered records.
        """
        from .canon import equitable_classes

        return tuple(equitable_classes([a.label for a in self.atoms], self.adjacency))

    @cached_property
    def canonical_positions(self) -> tuple[int, ...]:
        from .canon import canonical_order

        pos, _ = canonical_order([a.label for a in self.atoms], self.bonds)
        return tuple(pos)

    @cached_property
    def canonical_key(self) -> str:
        from .smiles import write_smiles

        return write_smiles(self, atom_maps=False)

    @property
    def mapped(self) -> bool:
        return any(a.map_index for a in self.atoms)

    def strip_maps(self) -> "Molecule":
        if not self.mapped:
            return self
        mol = Molecule(tuple(replace(a, map_index=0) for a in self.atoms), self.bonds)
        # isomorphism invariants do not depend on map labels
        for name in ("canonical_key", "canonical_positions", "symmetry_classes"):
            if name in self.__dict__:
                mol.__dict__[name] = self.__dict__[name]
        return mol

    def renumber(self, order: Sequence[int]) -> "Molecule":
        """Copy with atom ``order[i]`` moved to position i."""
        where = {old: new for new, old in enumerate(order)}
        return Molecule(
            tuple(self.atoms[i] for i in order),
            tuple((where[a], where[b], o) for a, b, o in self.bonds),
        )


def components(n: int, bonds: Iterable[Sequence[int]]) -> list[list[int]]:
    """Connected components as sorted atom lists, ordered by smallest atom."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, *_ in bonds:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups)]


def find_bridges(n: int, adj) -> set[tuple[int, int]]:
    """Bridge edges (a < b) of an undirected graph, iterative Tarjan."""
    disc = [-1] * n
    low = [0] * n
    bridges: set[tuple[int, int]] = set()
    t = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = t
        t += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, parent, it = stack[-1]
            for u, _ in it:
                if u == parent:
                    continue
                if disc[u] == -1:
                    disc[u] = low[u] = t
                    t += 1
                    stack.append((u, v, iter(adj[u])))
                    break
                low[v] = min(low[v], disc[u])
            else:
                stack.pop()
                if parent != -1:
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        bridges.add((min(v, parent), max(v, parent)))
    return bridges


def split_fragments(atoms: Sequence[Atom], bonds: Sequence[Sequence[int]]) -> list[Molecule]:
    """Split an arbitrary atom/bond graph into connected Molecule values."""
    out = []
    for comp in components(len(atoms), bonds):
        where = {old: new for new, old in enumerate(comp)}
        sub_bonds = tuple(
            (where[a], where[b], o) for a, b, o in bonds if a in where and b in where
        )
        out.append(Molecule(tuple(atoms[i] for i in comp), sub_bonds))
    return out
