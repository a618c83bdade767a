"""Directed bipartite molecule/reaction knowledge graph.

Molecule and reaction nodes have separate dense integer id spaces, both
assigned in ingest order.  Edges carry a role; product edges point from a
reaction to a molecule and every other role points from a molecule to a
reaction.  The graph is append-only.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import struct
import zlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .chem.molecule import Atom, Molecule
from .chem.reaction import AGENT_ROLES, ROLES, ReactionCenter, ReactionRecord, parse_reaction, reaction_center
from .chem.smiles import parse_molecule
from .errors import (
    ChecksumError,
    EmptyInput,
    FormatVersionError,
    NoMappingError,
    NotAReactant,
    RecordError,
    RxnGraphError,
    UnknownMolecule,
    UnknownNode,
)
from .fingerprint import STRUCTURAL, CountedFingerprint, reaction_fingerprint

log = logging.getLogger(__name__)

MOLECULE, REACTION = "molecule", "reaction"
FORMAT_VERSION = 1
MAGIC = b"RXKG"
_HEADER = struct.Struct("<4sHQ32s")


def parse_record_line(line: str) -> ReactionRecord:
    """Parse one ``id<TAB>year<TAB>reaction_smiles[<TAB>roles]`` line."""
    fields = line.rstrip("\r\n").split("\t")
    if len(fields) < 3 or len(fields) > 4:
        raise RecordError(f"expected 3 or 4 tab-separated fields, got {len(fields)}")
    rid, year, smiles = fields[0].strip(), fields[1].strip(), fields[2].strip()
    if not rid:
        raise RecordError("empty reaction id")
    try:
        year_value = int(year)
    except ValueError:
        raise RecordError(f"bad year {year!r}") from None
    roles = [r for r in fields[3].split(",") if r.strip()] if len(fields) == 4 else []
    return parse_reaction(smiles, rid, year_value, roles)


def read_records(lines: Iterable[str]) -> Iterator[tuple[int, ReactionRecord | Exception]]:
    """Yield ``(line_number, record_or_error)`` for non-blank, non-comment lines."""
    for no, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            yield no, parse_record_line(line)
        except (RxnGraphError, ValueError) as exc:
            yield no, exc


@dataclass
class IngestReport:
    lines: int = 0
    added: int = 0
    duplicates: int = 0
    unmapped: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"lines={self.lines} added={self.added} duplicates={self.duplicates} "
            f"unmapped={self.unmapped} skipped={len(self.skipped)}"
        )


class KnowledgeGraph:
    def __init__(self, fp_radius: int = 2, fp_variant: str = STRUCTURAL):
        self.fp_radius = fp_radius
        self.fp_variant = fp_variant
        self.molecules: list[Molecule] = []
        self.reactions: list[ReactionRecord] = []
        self.reactant_nodes: list[tuple[int, ...]] = []
        self.agent_nodes: list[tuple[tuple[int, str], ...]] = []
        self.product_nodes: list[tuple[int, ...]] = []
        self.centers: list[ReactionCenter | None] = []
        self.rfps: list[CountedFingerprint] = []
        # per reaction: reactant molecule id -> sorted symmetry classes of its changed atoms
        self.sites: list[dict[int, tuple[int, ...]]] = []
        self._key_to_id: dict[str, int] = {}
        self._rxn_ids: dict[str, int] = {}
        self._mol_adj: dict[str, list[list[int]]] = {role: [] for role in ROLES}
        self._fp_memo: dict = {}
        self._derived: dict = {}

    # -- construction -------------------------------------------------
    def _molecule_id(self, mol: Molecule) -> int:
        key = mol.canonical_key
        mid = self._key_to_id.get(key)
        if mid is None:
            mid = len(self.molecules)
            self._key_to_id[key] = mid
            self.molecules.append(mol.strip_maps())
            for role in ROLES:
                self._mol_adj[role].append([])
        return mid

    def add_record(self, record: ReactionRecord) -> int:
        """Add a reaction; re-adding an already known id is a no-op."""
        if record.id in self._rxn_ids:
            return self._rxn_ids[record.id]
        try:
            center = reaction_center(record)
        except NoMappingError:
            center = None
        rfp = reaction_fingerprint(record, self.fp_radius, self.fp_variant, self._fp_memo)
        return self._append(record, center, rfp, None)

    def _append(self, record, center, rfp, sites) -> int:
        rid = len(self.reactions)
        reactants = tuple(self._molecule_id(m) for m in record.reactants)
        agents = tuple((self._molecule_id(m), role) for m, role in record.agents)
        products = tuple(self._molecule_id(m) for m in record.products)
        if sites is None:
            sites = {}
            if center is not None:
                for mid, mol, changed in zip(reactants, record.reactants, center.changed_atoms):
                    classes = {mol.symmetry_classes[i] for i in changed}
                    sites[mid] = tuple(sorted(classes | set(sites.get(mid, ()))))
        self.reactions.append(record)
        self._rxn_ids[record.id] = rid
        self.reactant_nodes.append(reactants)
        self.agent_nodes.append(agents)
        self.product_nodes.append(products)
        self.centers.append(center)
        self.rfps.append(rfp)
        self.sites.append(sites)
        for role, mid in self._reaction_edges(rid):
            adj = self._mol_adj[role][mid]
            if not adj or adj[-1] != rid:
                adj.append(rid)
        self._derived.clear()
        return rid

    def _reaction_edges(self, rid: int) -> list[tuple[str, int]]:
        seen = set()
        out = []
        items = [("reactant", m) for m in self.reactant_nodes[rid]]
        items += [(role, m) for m, role in self.agent_nodes[rid]]
        items += [("product", m) for m in self.product_nodes[rid]]
        for item in items:
            if item not in seen:
                seen.add(item)
                out.append(item)
        return out

    # -- queries ------------------------------------------------------
    @property
    def n_molecules(self) -> int:
        return len(self.molecules)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    @property
    def edges(self) -> list[tuple[int, int, str]]:
        """All ``(molecule_id, reaction_id, role)`` edges, in reaction order."""
        return [(m, r, role) for r in range(self.n_reactions) for role, m in self._reaction_edges(r)]

    def molecule_id(self, mol: Molecule | str) -> int:
        """Node id of a molecule given as Molecule or SMILES text."""
        if isinstance(mol, str):
            try:
                mol = parse_molecule(mol)
            except RxnGraphError as exc:
                raise UnknownMolecule(f"{mol!r}: {exc}") from exc
        mid = self._key_to_id.get(mol.canonical_key)
        if mid is None:
            raise UnknownMolecule(f"molecule not in graph: {mol.canonical_key}")
        return mid

    def reaction_id(self, external_id: str) -> int:
        try:
            return self._rxn_ids[external_id]
        except KeyError:
            raise UnknownNode(external_id) from None

    def neighbors(self, node_id: int, role: str, kind: str = MOLECULE) -> list[int]:
        """Adjacent node ids under ``role``, ascending.

        For a molecule this is the reactions in which it plays ``role``; for a
        reaction, the molecules playing ``role`` in it.
        """
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        if kind == MOLECULE:
            if not 0 <= node_id < self.n_molecules:
                raise UnknownNode(f"molecule {node_id}")
            return list(self._mol_adj[role][node_id])
        if kind == REACTION:
            if not 0 <= node_id < self.n_reactions:
                raise UnknownNode(f"reaction {node_id}")
            return sorted({m for r, m in self._reaction_edges(node_id) if r == role})
        raise ValueError(f"unknown node kind {kind!r}")

    def agents(self, rid: int) -> frozenset[tuple[int, str]]:
        return frozenset(self.agent_nodes[rid])

    def reactant_index(self, rid: int, mid: int) -> int:
        """Position of molecule ``mid`` among the reactants of reaction ``rid``."""
        try:
            return self.reactant_nodes[rid].index(mid)
        except ValueError:
            raise NotAReactant(f"molecule {mid} is not a reactant of reaction {rid}") from None

    def reaction_fps(self, variant: str, radius: int) -> list[CountedFingerprint]:
        """Reaction fingerprints for a variant/radius (precomputed for the default)."""
        if (variant, radius) == (self.fp_variant, self.fp_radius):
            return self.rfps
        key = ("rfps", variant, radius)
        if key not in self._derived:
            self._derived[key] = [
                reaction_fingerprint(r, radius, variant, self._fp_memo) for r in self.reactions
            ]
        return self._derived[key]

    def cached(self, key, build):
        """Memoise derived structures; cleared whenever the graph grows."""
        if key not in self._derived:
            self._derived[key] = build()
        return self._derived[key]


def build_graph(records: Iterable[ReactionRecord], fp_radius: int = 2, fp_variant: str = STRUCTURAL) -> KnowledgeGraph:
    g = KnowledgeGraph(fp_radius, fp_variant)
    for rec in records:
        g.add_record(rec)
    return g


def ingest(
    lines: Iterable[str],
    graph: KnowledgeGraph | None = None,
    fp_radius: int = 2,
    fp_variant: str = STRUCTURAL,
) -> tuple[KnowledgeGraph, IngestReport]:
    """Build (or extend) a graph from record lines; bad lines are reported, not fatal."""
    g = graph if graph is not None else KnowledgeGraph(fp_radius, fp_variant)
    report = IngestReport()
    for no, item in read_records(lines):
        report.lines += 1
        if isinstance(item, Exception):
            report.skipped.append((no, f"{type(item).__name__}: {item}"))
            continue
        if item.id in g._rxn_ids:
            report.duplicates += 1
            continue
        rid = g.add_record(item)
        report.added += 1
        if g.centers[rid] is None:
            report.unmapped += 1
    if report.lines == 0:
        raise EmptyInput("no reaction records in input")
    for no, reason in report.skipped:
        log.warning("line %d skipped: %s", no, reason)
    return g, report


def ingest_file(path: str | Path, graph: KnowledgeGraph | None = None, **kw) -> tuple[KnowledgeGraph, IngestReport]:
    with open(path, encoding="utf-8") as fh:
        return ingest(fh, graph, **kw)


# -- persistence ------------------------------------------------------

def _b64(values) -> str:
    return base64.b64encode(np.asarray(values, dtype="<i4").tobytes()).decode("ascii")


def _unb64(text: str) -> list[int]:
    return np.frombuffer(base64.b64decode(text), dtype="<i4").tolist()


def _pack_molecules(mols: list[Molecule]) -> dict:
    """Column-packed molecules: a table of distinct atoms, then flat int32
    arrays of atom references and bond triples with per-molecule offsets."""
    atom_ids: dict[Atom, int] = {}
    atom_table, refs, atom_ptr, bonds, bond_ptr = [], [], [0], [], [0]
    for mol in mols:
        for atom in mol.atoms:
            at = atom_ids.get(atom)
            if at is None:
                at = atom_ids[atom] = len(atom_table)
                atom_table.append([atom.element, atom.charge, atom.explicit_h, int(atom.aromatic), atom.map_index])
            refs.append(at)
        for bond in mol.bonds:
            bonds.extend(bond)
        atom_ptr.append(len(refs))
        bond_ptr.append(len(bonds) // 3)
    return {"atom_table": atom_table, "atoms": _b64(refs), "atom_ptr": _b64(atom_ptr),
            "bonds": _b64(bonds), "bond_ptr": _b64(bond_ptr)}


def _unpack_molecules(data: dict) -> list[Molecule]:
    # the payload passed its checksum and was written by _pack_molecules, so
    # molecules are rebuilt without re-validation
    table = [Atom(e, c, h, bool(ar), m) for e, c, h, ar, m in data["atom_table"]]
    refs, atom_ptr = _unb64(data["atoms"]), _unb64(data["atom_ptr"])
    flat, bond_ptr = _unb64(data["bonds"]), _unb64(data["bond_ptr"])
    triples = list(zip(flat[0::3], flat[1::3], flat[2::3]))
    out = []
    for i in range(len(atom_ptr) - 1):
        atoms = tuple(table[r] for r in refs[atom_ptr[i]:atom_ptr[i + 1]])
        out.append(Molecule.trusted(atoms, tuple(triples[bond_ptr[i]:bond_ptr[i + 1]])))
    return out


def _payload(g: KnowledgeGraph) -> dict:
    # record molecules are stored once each and referenced by index; the
    # mapped reactants of a large corpus repeat heavily
    table: list = []
    index: dict = {}

    def ref(mol: Molecule, mid: int) -> int:
        key = (mol.atoms, mol.bonds)
        at = index.get(key)
        if at is None:
            at = index[key] = len(table)
            table.append((mid, mol))
        return at

    reactions = []
    for rid, rec in enumerate(g.reactions):
        center = g.centers[rid]
        reactions.append({
            "id": rec.id,
            "year": rec.year,
            "reactants": [ref(m, i) for m, i in zip(rec.reactants, g.reactant_nodes[rid])],
            "agents": [[ref(m, i), role] for (m, role), (i, _) in zip(rec.agents, g.agent_nodes[rid])],
            "products": [ref(m, i) for m, i in zip(rec.products, g.product_nodes[rid])],
            "center": None if center is None else {
                "bonds": sorted([a, b, c] for a, b, c in center.changed_bonds),
                "atoms": [sorted(s) for s in center.changed_atoms],
            },
            "rfp": [[k, v] for k, v in g.rfps[rid].items()],
            "sites": [[m, list(c)] for m, c in sorted(g.sites[rid].items())],
        })
    return {
        "fp_radius": g.fp_radius,
        "fp_variant": g.fp_variant,
        "keys": [m.canonical_key for m in g.molecules],
        "molecules": _pack_molecules(g.molecules),
        "record_nodes": [mid for mid, _ in table],
        "record_molecules": _pack_molecules([mol for _, mol in table]),
        "reactions": reactions,
    }


def dumps(g: KnowledgeGraph) -> bytes:
    body = json.dumps(_payload(g), sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = zlib.compress(body, 6)
    return _HEADER.pack(MAGIC, FORMAT_VERSION, len(blob), hashlib.sha256(blob).digest()) + blob


def loads(data: bytes) -> KnowledgeGraph:
    if len(data) < _HEADER.size:
        raise ChecksumError("snapshot truncated inside header")
    magic, version, length, digest = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatVersionError("not a knowledge-graph snapshot")
    if version != FORMAT_VERSION:
        raise FormatVersionError(f"snapshot version {version}, reader supports {FORMAT_VERSION}")
    blob = data[_HEADER.size:]
    if len(blob) != length or hashlib.sha256(blob).digest() != digest:
        raise ChecksumError("snapshot payload does not match its checksum")
    payload = json.loads(zlib.decompress(blob))
    g = KnowledgeGraph(payload["fp_radius"], payload["fp_variant"])
    for key, mol in zip(payload["keys"], _unpack_molecules(payload["molecules"])):
        mol.__dict__["canonical_key"] = key
        g._key_to_id[key] = len(g.molecules)
        g.molecules.append(mol)
        for role in ROLES:
            g._mol_adj[role].append([])
    table = []
    for mid, mol in zip(payload["record_nodes"], _unpack_molecules(payload["record_molecules"])):
        # the node id already names the canonical key; do not recompute it
        mol.__dict__["canonical_key"] = g.molecules[mid].canonical_key
        table.append(mol)
    for item in payload["reactions"]:
        record = ReactionRecord(
            item["id"],
            item["year"],
            tuple(table[i] for i in item["reactants"]),
            tuple(table[i] for i in item["products"]),
            tuple((table[i], role) for i, role in item["agents"]),
        )
        c = item["center"]
        center = None if c is None else ReactionCenter(
            frozenset((a, b, ch) for a, b, ch in c["bonds"]),
            tuple(frozenset(s) for s in c["atoms"]),
        )
        rfp = CountedFingerprint({k: v for k, v in item["rfp"]}, g.fp_variant, g.fp_radius)
        sites = {m: tuple(cl) for m, cl in item["sites"]}
        g._append(record, center, rfp, sites)
    return g


def save(g: KnowledgeGraph, path: str | Path) -> None:
    Path(path).write_bytes(dumps(g))


def load(path: str | Path) -> KnowledgeGraph:
    return loads(Path(path).read_bytes())


# -- statistics and audit ---------------------------------------------

def stats(g: KnowledgeGraph) -> dict:
    edge_counts = Counter({role: 0 for role in ROLES})
    for _, _, role in g.edges:
        edge_counts[role] += 1
    mol_degree = Counter(len(g._mol_adj["reactant"][m]) for m in range(g.n_molecules))
    rxn_degree = Counter(len(set(nodes)) for nodes in g.reactant_nodes)
    return {
        "molecules": g.n_molecules,
        "reactions": g.n_reactions,
        "edges": dict(edge_counts),
        "molecule_reactant_degree": dict(sorted(mol_degree.items())),
        "reaction_reactant_count": dict(sorted(rxn_degree.items())),
    }


def audit(g: KnowledgeGraph) -> list[str]:
    """Check the structural invariants; returns a list of violations."""
    problems = []
    keys = [m.canonical_key for m in g.molecules]
    if len(set(keys)) != len(keys):
        problems.append("duplicate canonical keys among molecule nodes")
    for m in g.molecules:
        if any(a.element == "H" for a in m.atoms) and len(m.atoms) > 1:
            problems.append(f"hydrogen atom node in {m.canonical_key}")
    for rid, rec in enumerate(g.reactions):
        roles = {role for role, _ in g._reaction_edges(rid)}
        if "reactant" not in roles or "product" not in roles:
            problems.append(f"reaction {rec.id} lacks a reactant or product edge")
        for mid, mol in zip(g.reactant_nodes[rid], rec.reactants):
            if keys[mid] != mol.canonical_key:
                problems.append(f"reaction {rec.id} reactant mapped to wrong node")
        for mid, mol in zip(g.product_nodes[rid], rec.products):
            if keys[mid] != mol.canonical_key:
                problems.append(f"reaction {rec.id} product mapped to wrong node")
        for role, mid in g._reaction_edges(rid):
            if rid not in g._mol_adj[role][mid]:
                problems.append(f"missing {role} adjacency {mid}->{rid}")
    for role in ROLES:
        for mid, rxns in enumerate(g._mol_adj[role]):
            if rxns != sorted(set(rxns)):
                problems.append(f"unsorted {role} adjacency of molecule {mid}")
            for rid in rxns:
                if (role, mid) not in g._reaction_edges(rid):
                    problems.append(f"dangling {role} adjacency {mid}->{rid}")
    return problems


def edge_direction(role: str) -> tuple[str, str]:
    """(source kind, target kind) of an edge with this role."""
    if role == "product":
        return (REACTION, MOLECULE)
    if role in ROLES:
        return (MOLECULE, REACTION)
    raise ValueError(role)


__all__ = [
    "AGENT_ROLES", "IngestReport", "KnowledgeGraph", "MOLECULE", "REACTION",
    "audit", "build_graph", "dumps", "edge_direction", "ingest", "ingest_file",
    "load", "loads", "parse_record_line", "read_records", "save", "stats",
]
