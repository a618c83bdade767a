"""SMILES subset reader and canonical writer.

Supported: organic-subset and bracket atoms, charges, hydrogen counts,
atom-map labels, branches, ring closures (digits and ``%nn``), bond symbols
``- = # :`` and lowercase aromatic atoms.  Stereo markers and isotopes raise
:class:`UnsupportedFeature`.  Aromaticity is taken as written; an implicit
bond between two aromatic atoms is aromatic unless it is a bridge (so
``c1ccccc1c1ccccc1`` reads as biphenyl with a single inter-ring bond).
"""

from __future__ import annotations

from ..errors import SmilesSyntaxError, UnsupportedFeature
from .molecule import (
    AROMATIC,
    DOUBLE,
    ELEMENT_INDEX,
    SINGLE,
    TRIPLE,
    Atom,
    Molecule,
    components,
    find_bridges,
)

DEFAULT_VALENCES = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5),
    "S": (2, 4, 6), "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}
_AROMATIC_SYMBOLS = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
_BRACKET_AROMATIC = dict(_AROMATIC_SYMBOLS, se="Se")
_WRITE_AROMATIC = {v: k for k, v in _BRACKET_AROMATIC.items()}
_BOND_SYMBOLS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}
_BOND_TEXT = {SINGLE: "-", DOUBLE: "=", TRIPLE: "#", AROMATIC: ":"}


def implicit_hydrogens(element: str, aromatic: bool, orders) -> int:
    """Hydrogen count an unbracketed organic-subset atom receives."""
    total = sum(1 if o == AROMATIC else o for o in orders)
    if aromatic:
        total += 1
    for v in DEFAULT_VALENCES[element]:
        if v >= total:
            return v - total
    return 0


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        # [element, charge, hcount or None (implicit), aromatic, map, offset]
        self.atoms: list[list] = []
        self.bonds: list[list] = []  # [a, b, order or None]
        self._pairs: set[tuple[int, int]] = set()

    def error(self, msg, pos=None):
        pos = self.i if pos is None else pos
        raise SmilesSyntaxError(msg, len(self.text[:pos].encode("utf-8")), self.text)

    def unsupported(self, token, pos):
        raise UnsupportedFeature(token, len(self.text[:pos].encode("utf-8")))

    def parse(self):
        text = self.text
        n = len(text)
        prev = None
        branches: list[tuple[int, int]] = []
        rings: dict[int, tuple[int, str | None, int]] = {}
        bond_sym = None
        bond_pos = 0
        last_open = -1  # position of most recent '(' with no atom yet
        while self.i < n:
            ch = text[self.i]
            start = self.i
            if ch == "(":
                if prev is None:
                    self.error("branch without preceding atom")
                if bond_sym is not None:
                    self.error("bond symbol before branch")
                branches.append((prev, start))
                last_open = start
                self.i += 1
            elif ch == ")":
                if not branches:
                    self.error("unbalanced parenthesis")
                if bond_sym is not None:
                    self.error("dangling bond symbol", bond_pos)
                if last_open == branches[-1][1]:
                    self.error("empty branch")
                prev, _ = branches.pop()
                last_open = -1
                self.i += 1
            elif ch in _BOND_SYMBOLS:
                if prev is None or bond_sym is not None:
                    self.error("unexpected bond symbol")
                bond_sym, bond_pos = ch, start
                self.i += 1
            elif ch in "/\\":
                self.unsupported(ch, start)
            elif ch == "$":
                self.unsupported(ch, start)
            elif ch == ".":
                if bond_sym is not None or prev is None:
                    self.error("unexpected '.'")
                if branches:
                    self.error("'.' inside branch")
                prev = None
                self.i += 1
            elif ch.isdigit() or ch == "%":
                if prev is None:
                    self.error("ring bond without preceding atom")
                if ch == "%":
                    digits = text[self.i + 1:self.i + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        self.error("malformed %nn ring bond")
                    num = int(digits)
                    self.i += 3
                else:
                    num = int(ch)
                    self.i += 1
                if num in rings:
                    other, sym2, _ = rings.pop(num)
                    if other == prev:
                        self.error("ring bond to itself", start)
                    order = self._ring_order(sym2, bond_sym, start)
                    self._add_bond(other, prev, order, start)
                else:
                    rings[num] = (prev, bond_sym, start)
                bond_sym = None
            else:
                idx = self._atom(start)
                last_open = -1
                if prev is not None:
                    order = _BOND_SYMBOLS[bond_sym] if bond_sym else None
                    self._add_bond(prev, idx, order, start)
                bond_sym = None
                prev = idx
        if bond_sym is not None:
            self.error("dangling bond symbol", bond_pos)
        if branches:
            self.error("unbalanced parenthesis", n)
        if rings:
            _, _, pos = min(rings.values(), key=lambda r: r[2])
            self.error("unclosed ring bond", pos)
        if not self.atoms:
            self.error("no atoms", 0)
        return self._build()

    def _ring_order(self, a, b, pos):
        if a and b and a != b:
            self.error("conflicting ring bond symbols", pos)
        sym = a or b
        return _BOND_SYMBOLS[sym] if sym else None

    def _add_bond(self, a, b, order, pos):
        pair = (a, b) if a < b else (b, a)
        if pair in self._pairs:
            self.error("duplicate bond", pos)
        self._pairs.add(pair)
        self.bonds.append([a, b, order])

    def _atom(self, start) -> int:
        text = self.text
        ch = text[start]
        if ch == "[":
            return self._bracket_atom(start)
        two = text[start:start + 2]
        if two in ("Cl", "Br"):
            self.i += 2
            sym, arom = two, False
        elif ch in "BCNOPSFI":
            self.i += 1
            sym, arom = ch, False
        elif ch in _AROMATIC_SYMBOLS:
            self.i += 1
            sym, arom = _AROMATIC_SYMBOLS[ch], True
        elif ch == "@":
            self.unsupported(ch, start)
        else:
            self.error(f"unknown element {ch!r}", start)
        self.atoms.append([sym, 0, None, arom, 0, start])
        return len(self.atoms) - 1

    def _bracket_atom(self, start) -> int:
        text = self.text
        n = len(text)
        j = start + 1
        if j < n and text[j].isdigit():
            k = j
            while k < n and text[k].isdigit():
                k += 1
            self.unsupported(text[j:k], j)
        sym = None
        arom = False
        if text[j:j + 2] in _BRACKET_AROMATIC:
            sym, arom = _BRACKET_AROMATIC[text[j:j + 2]], True
            j += 2
        elif text[j:j + 2] in ELEMENT_INDEX and text[j:j + 2][1:].islower():
            sym = text[j:j + 2]
            j += 2
        elif text[j:j + 1] in ELEMENT_INDEX:
            sym = text[j]
            j += 1
        elif text[j:j + 1] in _BRACKET_AROMATIC:
            sym, arom = _BRACKET_AROMATIC[text[j]], True
            j += 1
        else:
            if j >= n:
                self.error("unclosed bracket atom", n)
            self.error("unknown element", j)
        if j < n and text[j] == "@":
            k = j
            while k < n and text[k] not in "H+-:]":
                k += 1
            self.unsupported(text[j:k], j)
        hcount = 0
        if j < n and text[j] == "H":
            j += 1
            k = j
            while k < n and text[k].isdigit():
                k += 1
            hcount = int(text[j:k]) if k > j else 1
            j = k
        charge = 0
        if j < n and text[j] in "+-":
            sign = 1 if text[j] == "+" else -1
            k = j + 1
            if k < n and text[k].isdigit():
                m = k
                while m < n and text[m].isdigit():
                    m += 1
                charge = sign * int(text[k:m])
                j = m
            else:
                count = 1
                while k < n and text[k] == text[j]:
                    count += 1
                    k += 1
                charge = sign * count
                j = k
        amap = 0
        if j < n and text[j] == ":":
            k = j + 1
            while k < n and text[k].isdigit():
                k += 1
            if k == j + 1:
                self.error("missing atom-map number", j)
            amap = int(text[j + 1:k])
            j = k
        if j >= n:
            self.error("unclosed bracket atom", n)
        if text[j] != "]":
            self.error(f"unexpected {text[j]!r} in bracket atom", j)
        self.i = j + 1
        self.atoms.append([sym, charge, hcount, arom, amap, start])
        return len(self.atoms) - 1

    def _build(self) -> list[Molecule]:
        atoms = self.atoms
        n = len(atoms)
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for a, b, _ in self.bonds:
            adj[a].append((b, 0))
            adj[b].append((a, 0))
        bridges = find_bridges(n, adj)
        for bond in self.bonds:
            if bond[2] is None:
                a, b = bond[0], bond[1]
                both = atoms[a][3] and atoms[b][3]
                bond[2] = AROMATIC if both and (min(a, b), max(a, b)) not in bridges else SINGLE
        orders: list[list[int]] = [[] for _ in range(n)]
        for a, b, o in self.bonds:
            orders[a].append(o)
            orders[b].append(o)
        for i, atom in enumerate(atoms):
            if atom[2] is None:
                atom[2] = implicit_hydrogens(atom[0], atom[3], orders[i])

        molecules = []
        for comp in components(n, self.bonds):
            molecules.append(self._fragment(comp))
        return molecules

    def _fragment(self, comp) -> Molecule:
        atoms = self.atoms
        if all(atoms[i][0] == "H" for i in comp):
            charge = sum(atoms[i][1] for i in comp)
            hcount = len(comp) - 1 + sum(atoms[i][2] for i in comp)
            return Molecule((Atom("H", charge, hcount),))
        members = set(comp)
        bonds = [b for b in self.bonds if b[0] in members]
        hydrogens = set()
        extra_h = dict.fromkeys(comp, 0)
        for i in comp:
            if atoms[i][0] != "H":
                continue
            attached = [b for b in bonds if i in (b[0], b[1])]
            if len(attached) != 1 or attached[0][2] != SINGLE or atoms[i][1] or atoms[i][2]:
                self.unsupported("[H]", atoms[i][5])
            a, b, _ = attached[0]
            extra_h[b if a == i else a] += 1
            hydrogens.add(i)
        keep = [i for i in comp if i not in hydrogens]
        where = {old: new for new, old in enumerate(keep)}
        mol_atoms = tuple(
            Atom(atoms[i][0], atoms[i][1], atoms[i][2] + extra_h[i], atoms[i][3], atoms[i][4])
            for i in keep
        )
        mol_bonds = tuple(
            (where[a], where[b], o) for a, b, o in bonds if a in where and b in where
        )
        return Molecule(mol_atoms, mol_bonds)


def parse_smiles(text: str) -> list[Molecule]:
    """Parse SMILES into one Molecule per connected fragment."""
    if not text or not text.strip():
        raise SmilesSyntaxError("empty SMILES", 0, text or "")
    return _Parser(text.strip()).parse()


def parse_molecule(text: str) -> Molecule:
    """Parse SMILES that must describe exactly one connected molecule."""
    mols = parse_smiles(text)
    if len(mols) != 1:
        raise SmilesSyntaxError(f"expected one molecule, found {len(mols)}", 0, text)
    return mols[0]


def _atom_token(atom: Atom, orders, atom_maps: bool) -> str:
    amap = atom.map_index if atom_maps else 0
    if (
        atom.element in DEFAULT_VALENCES
        and atom.charge == 0
        and not amap
        and (not atom.aromatic or atom.element in _WRITE_AROMATIC)
        and atom.explicit_h == implicit_hydrogens(atom.element, atom.aromatic, orders)
    ):
        return _WRITE_AROMATIC[atom.element] if atom.aromatic else atom.element
    sym = _WRITE_AROMATIC.get(atom.element, atom.element) if atom.aromatic else atom.element
    parts = ["[", sym]
    if atom.explicit_h:
        parts.append("H" if atom.explicit_h == 1 else f"H{atom.explicit_h}")
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        parts.append(sign if abs(atom.charge) == 1 else f"{sign}{abs(atom.charge)}")
    if amap:
        parts.append(f":{amap}")
    parts.append("]")
    return "".join(parts)


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"


def write_smiles(mol: Molecule, atom_maps: bool = True) -> str:
    """Canonical SMILES for ``mol``.

    Atom order follows the canonical labelling, so isomorphic molecules give
    identical text when ``atom_maps`` is false (map labels never influence the
    traversal).
    """
    n = len(mol.atoms)
    pos = mol.canonical_positions
    adj = mol.adjacency
    ring_bonds = mol.ring_bonds
    nbrs = [sorted(adj[v], key=lambda x: pos[x[0]]) for v in range(n)]
    start = min(range(n), key=pos.__getitem__)

    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    opens: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    closes: list[list[int]] = [[] for _ in range(n)]
    visited = [False] * n
    visited[start] = True
    used = set()
    stack = [(start, iter(nbrs[start]))]
    while stack:
        v, it = stack[-1]
        for u, o in it:
            e = (v, u) if v < u else (u, v)
            if e in used:
                continue
            used.add(e)
            if visited[u]:
                opens[u].append((v, o))
                closes[v].append(u)
            else:
                visited[u] = True
                children[v].append((u, o))
                stack.append((u, iter(nbrs[u])))
                break
        else:
            stack.pop()

    def bond_text(a, b, o):
        e = (a, b) if a < b else (b, a)
        aromatic_default = mol.atoms[a].aromatic and mol.atoms[b].aromatic and e in ring_bonds
        inferred = AROMATIC if aromatic_default else SINGLE
        return "" if o == inferred else _BOND_TEXT[o]

    out: list[str] = []
    digit_of: dict[tuple[int, int], int] = {}
    free: list[int] = []
    next_digit = 1
    work: list = [(start, "")]
    while work:
        item = work.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        v, btext = item
        out.append(btext)
        out.append(_atom_token(mol.atoms[v], [o for _, o in adj[v]], atom_maps))
        for u in closes[v]:
            d = digit_of.pop((u, v))
            out.append(_ring_label(d))
            free.append(d)
        for u, o in opens[v]:
            if free:
                free.sort()
                d = free.pop(0)
            else:
                d = next_digit
                next_digit += 1
            digit_of[(v, u)] = d
            out.append(bond_text(v, u, o) + _ring_label(d))
        pending: list = []
        kids = children[v]
        for i, (u, o) in enumerate(kids):
            if i < len(kids) - 1:
                pending += ["(", (u, bond_text(v, u, o)), ")"]
            else:
                pending.append((u, bond_text(v, u, o)))
        work.extend(reversed(pending))
    return "".join(out)
